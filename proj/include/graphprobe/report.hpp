#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "graphprobe/config.hpp"
#include "graphprobe/probe_metrics.hpp"
#include "graphprobe/restoration.hpp"

namespace gp {

inline constexpr const char* kReportSchema = "gp-report/1";
inline constexpr const char* kToolkitVersion = "0.1.0";

/// The config as stored in outputs: execution-only keys (jobs, out) are
/// dropped so results written with different job counts or to different
/// directories stay byte-identical.
Json recorded_config(const Json& config);

/// Envelope shared by every command: schema, version, command, the effective
/// config verbatim, inputs; callers add "result", "warnings" and "skipped".
Json report_envelope(const std::string& command, const Json& config, const Json& inputs);

Json to_json(const MiEstimate& e);
Json to_json(const ProbeReport& r);
Json to_json(const AucReport& r);

/// One row per repeat: MIG (repeat, seed, mi_xz, self_mi, null_mi, mig),
/// MIL (selector, repeat, seed, mi_xz, mi_x_zprime, null_mi, mil).
std::string repeats_csv(const std::vector<ProbeReport>& reports);
/// ratio, normalized_mi_percent, std, then one column per repeat.
std::string sweep_csv(const ProbeReport& sweep);
/// depth, auc, and with per_label one column per label seen in any report.
std::string auc_csv(const std::vector<AucReport>& reports, bool per_label);

/// Fixed formatting for CSV cells (shortest round-trip).
std::string format_number(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace gp
