#include <doctest.h>

#include "fixtures.hpp"
#include "graphprobe/config.hpp"
#include "graphprobe/error.hpp"
#include "graphprobe/report.hpp"

using namespace gp;

TEST_SUITE("config") {
  TEST_CASE("unknown keys and wrong types name the dotted path") {
    Json base = default_config();
    try {
      merge_config(base, Json::parse(R"({"critic": {"epochz": 3}})"));
      FAIL("expected a UsageError");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("critic.epochz") != std::string::npos);
    }
    CHECK_THROWS_AS(merge_config(base, Json::parse(R"({"repeats": "many"})")), UsageError);
    CHECK_THROWS_AS(apply_override(base, "walk.nope", "3"), UsageError);
    CHECK_THROWS_AS(apply_override(base, "critic.epochs", "abc"), UsageError);
  }

  TEST_CASE("file then overrides, in order") {
    fx::TempDir dir("cfg");
    fx::spit(dir / "c.json", R"({"seed": 5, "critic": {"epochs": 17, "learning_rate": 0.01}})");
    Json t = resolve_config(dir / "c.json", {{"critic.epochs", "19"}, {"seed", "6"}, {"critic.head_hidden_dims", "[8, 8]"}});
    RunConfig rc{t};
    CHECK(rc.seed() == 6);
    CHECK(rc.critic().epochs == 19);
    CHECK(rc.critic().learning_rate == doctest::Approx(0.01));
    CHECK(rc.critic().head_hidden_dims == std::vector<std::size_t>{8, 8});
    CHECK(rc.repeats() == 20);
    CHECK(rc.depths().size() == 6);
    CHECK(rc.sweep_ratios().size() == 11);
    CHECK(rc.synth_kind() == "corpus");
    CHECK_THROWS(resolve_config(dir / "missing.json", {}));
  }

  TEST_CASE("typed views validate") {
    Json t = default_config();
    apply_override(t, "probe.rho", "1.5");
    CHECK_THROWS(RunConfig{t}.probe());
    Json u = default_config();
    apply_override(u, "skipgram.side", "diagonal");
    CHECK_THROWS_AS(RunConfig{u}.skipgram(), UsageError);
  }

  TEST_CASE("critic hash ignores the seed only") {
    CriticConfig a, b;
    b.seed = 99;
    CHECK(a.hash() == b.hash());
    b.epochs = 49;
    CHECK(a.hash() != b.hash());
  }
}

TEST_SUITE("report") {
  TEST_CASE("envelope") {
    Json env = report_envelope("birdseye", default_config(), Json::object());
    CHECK(env["schema"] == kReportSchema);
    CHECK(env["toolkit_version"] == kToolkitVersion);
    CHECK(env["command"] == "birdseye");
    CHECK(env["config"]["critic"]["epochs"] == 50);
  }

  TEST_CASE("CSV shapes") {
    ProbeReport mig;
    mig.kind = "MIG";
    mig.repeats = {{0, 11, 1.5, 3.0, 0.0, 0.0, 0.5}, {1, 12, 1.0, 2.0, 0.0, 0.0, 0.5}};
    const std::string csv = repeats_csv({mig});
    CHECK(csv.rfind("repeat,seed,mi_xz,self_mi,null_mi,mig\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("0,11,1.5,3,0,0.5\n") != std::string::npos);

    ProbeReport mil = mig;
    mil.kind = "MIL";
    mil.selector = "edge-label:det";
    CHECK(repeats_csv({mil}).rfind("selector,repeat,seed,mi_xz,mi_x_zprime,null_mi,mil\n", 0) == 0);

    ProbeReport sweep;
    sweep.kind = "noise-sweep";
    sweep.sweep = {{0.0, {100, 100}, 100, 0}, {1.0, {1, 3}, 2, std::sqrt(2.0)}};
    const std::string s = sweep_csv(sweep);
    CHECK(s.rfind("ratio,normalized_mi_percent,std,repeat_0,repeat_1\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);

    AucReport a, b;
    a.depth = 0;
    a.global_auc = 0.5;
    a.per_label_auc = {{"det", 0.6}};
    b.depth = 1;
    b.global_auc = 0.75;
    b.per_label_auc = {{"det", 0.7}, {"prep", 0.8}};
    CHECK(auc_csv({a, b}, false) == "depth,auc\n0,0.5\n1,0.75\n");
    const std::string per = auc_csv({a, b}, true);
    CHECK(per.rfind("depth,auc,auc_det,auc_prep\n", 0) == 0);
  }

  TEST_CASE("numbers round-trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_number(2.0) == "2");
  }

  TEST_CASE("probe report JSON keeps mean and stddev consistent") {
    ProbeReport r;
    r.kind = "MIG";
    r.values = {0.1, 0.3};
    auto s = summarize(r.values);
    r.mean = s.mean;
    r.stddev = s.stddev;
    Json j = to_json(r);
    CHECK(j["mean"].get<double>() == r.mean);
    CHECK(j["values"].size() == 2);
  }
}
