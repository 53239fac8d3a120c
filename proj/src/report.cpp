#include "graphprobe/report.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "graphprobe/error.hpp"

namespace gp {

Json recorded_config(const Json& config) {
  Json c = config;
  c.erase("jobs");
  c.erase("out");
  return c;
}

Json report_envelope(const std::string& command, const Json& config, const Json& inputs) {
  Json j;
  j["schema"] = kReportSchema;
  j["toolkit_version"] = kToolkitVersion;
  j["command"] = command;
  j["config"] = recorded_config(config);
  j["inputs"] = inputs;
  return j;
}

Json to_json(const MiEstimate& e) {
  Json j;
  j["value"] = e.value;
  j["seed"] = e.seed;
  j["config_hash"] = e.config_hash;
  j["epochs_run"] = e.epochs_run;
  j["early_stopped"] = e.early_stopped;
  j["skipped_sentences"] = e.skipped_sentences;
  j["rejected_steps"] = e.rejected_steps;
  j["trace"] = e.trace;
  return j;
}

Json to_json(const ProbeReport& r) {
  Json j;
  j["kind"] = r.kind;
  if (!r.selector.empty()) j["selector"] = r.selector;
  if (r.kind != "MIG") j["noise_ratio"] = r.noise_ratio;
  j["values"] = r.values;
  j["mean"] = r.mean;
  j["std"] = r.stddev;
  j["degenerate"] = r.degenerate;
  if (r.kind == "MIL") {
    j["targeted_rows"] = r.targeted_rows;
  }
  j["total_rows"] = r.total_rows;
  j["critic_config_hash"] = r.critic_hash;
  j["skipped_sentences"] = r.skipped_sentences;
  Json reps = Json::array();
  for (const auto& rec : r.repeats) {
    Json x;
    x["repeat"] = rec.repeat;
    x["seed"] = rec.seed;
    if (r.kind == "noise-sweep") {
      x["self_mi"] = rec.self_mi;
    } else {
      x["mi_xz"] = rec.mi_xz;
      if (r.kind == "MIG") x["self_mi"] = rec.self_mi;
      x["null_mi"] = rec.null_mi;
      if (r.kind == "MIL") x["mi_x_zprime"] = rec.mi_perturbed;
      x[r.kind == "MIG" ? "mig" : "mil"] = rec.value;
    }
    reps.push_back(std::move(x));
  }
  j["repeats"] = std::move(reps);
  if (!r.sweep.empty()) {
    Json pts = Json::array();
    for (const auto& p : r.sweep) {
      pts.push_back({{"ratio", p.ratio}, {"normalized_mi_percent", p.mean}, {"std", p.stddev}, {"per_repeat", p.percents}});
    }
    j["curve"] = std::move(pts);
  }
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const AucReport& r) {
  Json j;
  j["depth"] = r.depth;
  j["global_auc"] = r.global_auc;
  j["positives"] = r.positives;
  j["negatives"] = r.negatives;
  Json per = Json::object();
  for (const auto& [label, v] : r.per_label_auc) per[label] = v;
  j["per_label_auc"] = std::move(per);
  Json counts = Json::object();
  for (const auto& [label, n] : r.label_counts) counts[label] = n;
  j["label_counts"] = std::move(counts);
  j["seed"] = r.config.seed;
  j["input_source"] = to_string(r.config.input_source);
  j["epochs_run"] = r.epochs_run;
  j["train_loss"] = r.train_loss;
  j["notes"] = r.notes;
  return j;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string repeats_csv(const std::vector<ProbeReport>& reports) {
  std::string out;
  if (reports.empty()) return out;
  const bool is_mil = reports.front().kind == "MIL";
  out += is_mil ? "selector,repeat,seed,mi_xz,mi_x_zprime,null_mi,mil\n" : "repeat,seed,mi_xz,self_mi,null_mi,mig\n";
  for (const auto& r : reports) {
    for (const auto& rec : r.repeats) {
      if (is_mil) {
        std::string sel = r.selector;
        for (char& c : sel) {
          if (c == ',' || c == '"') c = ';';
        }
        out += sel + "," + std::to_string(rec.repeat) + "," + std::to_string(rec.seed) + "," + format_number(rec.mi_xz) +
               "," + format_number(rec.mi_perturbed) + "," + format_number(rec.null_mi) + "," + format_number(rec.value) + "\n";
      } else {
        out += std::to_string(rec.repeat) + "," + std::to_string(rec.seed) + "," + format_number(rec.mi_xz) + "," +
               format_number(rec.self_mi) + "," + format_number(rec.null_mi) + "," + format_number(rec.value) + "\n";
      }
    }
  }
  return out;
}

std::string sweep_csv(const ProbeReport& sweep) {
  std::string out = "ratio,normalized_mi_percent,std";
  const std::size_t reps = sweep.sweep.empty() ? 0 : sweep.sweep.front().percents.size();
  for (std::size_t r = 0; r < reps; ++r) out += ",repeat_" + std::to_string(r);
  out += "\n";
  for (const auto& p : sweep.sweep) {
    out += format_number(p.ratio) + "," + format_number(p.mean) + "," + format_number(p.stddev);
    for (double v : p.percents) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

std::string auc_csv(const std::vector<AucReport>& reports, bool per_label) {
  std::set<std::string> labels;
  if (per_label) {
    for (const auto& r : reports) {
      for (const auto& [l, v] : r.per_label_auc) labels.insert(l);
    }
  }
  std::string out = "depth,auc";
  for (const auto& l : labels) out += ",auc_" + l;
  out += "\n";
  for (const auto& r : reports) {
    out += std::to_string(r.depth) + "," + format_number(r.global_auc);
    for (const auto& l : labels) {
      auto it = r.per_label_auc.find(l);
      out += ",";
      if (it != r.per_label_auc.end()) out += format_number(it->second);
    }
    out += "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace gp
