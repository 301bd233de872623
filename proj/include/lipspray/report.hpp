#pragma once

#include "lipspray/convexity.hpp"

#include <iosfwd>

namespace lipspray {

inline constexpr const char* kToolVersion = "0.1.0";

/// One CLI invocation: inputs, certificates and probe outcomes.
struct RunReport {
    std::string command;
    /// Canonical JSON of the inputs; its FNV-1a digest is recorded.
    std::string input;
    std::uint64_t seed = 0;
    std::vector<ConvexityCertificate> certificates;
    std::vector<ProbeReport> probes;
    std::vector<std::string> diagnostics;
    double seconds = 0.0;

    bool all_passed() const;
};

std::uint64_t fnv1a64(std::string_view text);

/// Versioned JSON with `schema: 1`. Non-finite numbers become null.
std::string to_json(const RunReport& r);

struct ReportSummary {
    std::string file;
    std::string command;
    std::vector<std::pair<std::string, bool>> probes;
    bool certified = true;
};

/// Reads the probe names and outcomes back from a JSON report.
ReportSummary summarize_report(const std::string& json_text, const std::string& file = "");

/// Header t, x0.., v0..; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const GeodesicSolution& sol);

}  // namespace lipspray
