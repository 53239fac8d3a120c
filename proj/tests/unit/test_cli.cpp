#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "graphprobe/embedding_io.hpp"

#ifndef GRAPHPROBE_CLI
#error "GRAPHPROBE_CLI must name the graphprobe executable"
#endif

namespace {

const char* kSmallConfig = R"({
  "repeats": 2,
  "walk": {"walks_per_node": 20},
  "skipgram": {"embedding_dim": 16, "epochs": 100},
  "critic": {"projection_dim": 16, "head_hidden_dims": [16], "epochs": 4, "smoothing_window": 2, "learning_rate": 0.001},
  "link": {"hidden_dim": 16, "epochs": 2},
  "noise_sweep": {"ratios": [0.0, 0.5, 1.0]},
  "synth": {"n_sentences": 12, "min_nodes": 6, "max_nodes": 10, "x_dim": 16}
})";

int run(const std::string& args) {
  const std::string cmd = std::string(GRAPHPROBE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct Workspace {
  fx::TempDir dir;
  std::string cfg;
  explicit Workspace(const std::string& name) : dir(name) {
    fx::spit(dir / "small.json", kSmallConfig);
    cfg = "--config " + (dir / "small.json").string();
  }
  std::string p(const std::string& f) const { return (dir / f).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth is byte-identical across runs and job counts") {
    Workspace w("cli_synth");
    REQUIRE(run("synth " + w.cfg + " --seed 3 --out " + w.p("a")) == 0);
    REQUIRE(run("synth " + w.cfg + " --seed 3 --jobs 4 --out " + w.p("b")) == 0);
    for (const char* f : {"corpus.jsonl", "x.gpem", "z.gpem", "x.gpem.manifest.json", "z.gpem.manifest.json",
                          "metadata.json"}) {
      CAPTURE(f);
      const std::string a = fx::slurp(w.dir / "a" / f);
      CHECK_FALSE(a.empty());
      CHECK(a == fx::slurp(w.dir / "b" / f));
    }
    REQUIRE(run("synth " + w.cfg + " --seed 4 --out " + w.p("c")) == 0);
    CHECK(fx::slurp(w.dir / "a" / "z.gpem") != fx::slurp(w.dir / "c" / "z.gpem"));
  }

  TEST_CASE("gaussian synth records the closed form") {
    Workspace w("cli_gauss");
    REQUIRE(run("synth --synth.kind gaussian --gaussian.n_samples 500 --out " + w.p("g")) == 0);
    const std::string meta = fx::slurp(w.dir / "g" / "metadata.json");
    CHECK(meta.find("true_mi_nats") != std::string::npos);
    CHECK(gp::read_embedding_store(w.dir / "g" / "x.gpem").data().rows() == 500);
  }

  TEST_CASE("usage errors exit 1, data errors exit 2") {
    Workspace w("cli_errors");
    CHECK(run("synth --critic.epochz 3 --out " + w.p("x")) == 1);
    CHECK(run("synth --seed banana") == 1);
    CHECK(run("frobnicate") == 1);
    fx::spit(w.dir / "bad.json", "{\"nope\": 1}");
    CHECK(run("synth --config " + w.p("bad.json") + " --out " + w.p("x")) == 1);
    CHECK(run("embed --corpus " + w.p("missing.jsonl") + " --out " + w.p("x")) == 2);

    REQUIRE(run("synth " + w.cfg + " --out " + w.p("d")) == 0);
    std::string z = fx::slurp(w.dir / "d" / "z.gpem");
    fx::spit(w.dir / "d" / "z.gpem", z.substr(0, z.size() - 3));
    CHECK(run("birdseye " + w.cfg + " --corpus " + w.p("d/corpus.jsonl") + " --x " + w.p("d/x.gpem") + " --z " +
              w.p("d/z.gpem") + " --out " + w.p("e")) == 2);
  }

  TEST_CASE("embed reproduces the synth Z") {
    Workspace w("cli_embed");
    REQUIRE(run("synth " + w.cfg + " --seed 8 --out " + w.p("d")) == 0);
    REQUIRE(run("embed " + w.cfg + " --seed 8 --corpus " + w.p("d/corpus.jsonl") + " --out " + w.p("e")) == 0);
    auto z = gp::read_embedding_store(w.dir / "e" / "z.gpem");
    CHECK(z.cols() == 16);
    CHECK(z.manifest().size() == 12);
    CHECK(fx::slurp(w.dir / "e" / "z.gpem") == fx::slurp(w.dir / "d" / "z.gpem"));
    CHECK(std::filesystem::exists(w.dir / "e" / "embed_report.json"));
  }

  TEST_CASE("birdseye layer sweep, wormseye, validate and noise sweep outputs") {
    Workspace w("cli_probe");
    REQUIRE(run("synth " + w.cfg + " --out " + w.p("d")) == 0);
    const std::string base = w.cfg + " --corpus " + w.p("d/corpus.jsonl") + " --z " + w.p("d/z.gpem");
    const std::string x = w.p("d/x.gpem");

    REQUIRE(run("birdseye " + base + " --x " + x + " " + x + " " + x + " --out " + w.p("b")) == 0);
    const std::string layers = fx::slurp(w.dir / "b" / "birdseye_layers.csv");
    CHECK(layers.rfind("layer,mig_mean,mig_std\n", 0) == 0);
    CHECK(lines(layers) == 4);
    CHECK(std::filesystem::exists(w.dir / "b" / "birdseye_report.json"));

    REQUIRE(run("wormseye " + base + " --x " + x + " --edge-label det --edge-label prep --out " + w.p("w")) == 0);
    CHECK(lines(fx::slurp(w.dir / "w" / "wormseye_repeats.csv")) == 1 + 2 * 2);
    CHECK(run("wormseye " + base + " --x " + x + " --out " + w.p("w2")) == 1);  // no selector

    REQUIRE(run("validate " + base + " --per-relation --out " + w.p("v")) == 0);
    const std::string auc = fx::slurp(w.dir / "v" / "validate_auc.csv");
    CHECK(lines(auc) == 7);
    CHECK(auc.rfind("depth,auc,auc_", 0) == 0);

    REQUIRE(run("noise-sweep " + base + " --out " + w.p("n")) == 0);
    CHECK(lines(fx::slurp(w.dir / "n" / "noise_sweep.csv")) == 4);
  }

  TEST_CASE("reports do not depend on the job count") {
    Workspace w("cli_jobs");
    REQUIRE(run("synth " + w.cfg + " --out " + w.p("d")) == 0);
    const std::string base = w.cfg + " --corpus " + w.p("d/corpus.jsonl") + " --x " + w.p("d/x.gpem");
    REQUIRE(run("birdseye " + base + " --jobs 1 --out " + w.p("j1")) == 0);
    REQUIRE(run("birdseye " + base + " --jobs 8 --out " + w.p("j8")) == 0);
    for (const char* f : {"birdseye_repeats.csv", "birdseye_report.json"}) {
      CAPTURE(f);
      CHECK(fx::slurp(w.dir / "j1" / f) == fx::slurp(w.dir / "j8" / f));
    }
  }
}
