#include "lipspray/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace lipspray {

namespace {

using Json = nlohmann::ordered_json;

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

Json probe_json(const ProbeReport& p) {
    Json j;
    j["name"] = p.name;
    j["passed"] = p.passed;
    j["worst_residual"] = number(p.worst_residual);
    j["threshold"] = number(p.threshold);
    j["samples"] = p.samples;
    j["failures"] = p.failures;
    Json res = Json::array();
    for (double r : p.residuals) res.push_back(number(r));
    j["residuals"] = res;
    Json radii = Json::array();
    for (double r : p.radii) radii.push_back(number(r));
    j["radii"] = radii;
    Json values = Json::object();
    for (const auto& [k, v] : p.values) values[k] = number(v);
    j["values"] = values;
    j["notes"] = p.notes;
    return j;
}

Json certificate_json(const ConvexityCertificate& c) {
    Json j;
    j["status"] = std::string(to_string(c.status));
    j["center"] = vec_json(c.box.center);
    j["radius"] = number(c.box.radius);
    Json est;
    est["alpha"] = number(c.estimate.alpha);
    est["beta"] = number(c.estimate.beta);
    est["M"] = number(c.estimate.M);
    est["grid_density"] = c.estimate.grid_density;
    est["alpha_levels"] = {number(c.estimate.alpha_levels[0]), number(c.estimate.alpha_levels[1]),
                           number(c.estimate.alpha_levels[2])};
    est["beta_levels"] = {number(c.estimate.beta_levels[0]), number(c.estimate.beta_levels[1]),
                          number(c.estimate.beta_levels[2])};
    j["estimate"] = est;
    const ConvexityConstants& k = c.constants;
    Json cj;
    cj["bound_exp"] = number(k.bound_exp);
    cj["bound_velocity"] = number(k.bound_velocity);
    cj["bound_growth"] = number(k.bound_growth);
    cj["safety"] = number(k.safety);
    cj["delta"] = number(k.delta);
    cj["V"] = number(k.V);
    cj["A"] = number(k.A);
    cj["B"] = number(k.B);
    cj["D"] = number(k.D);
    j["constants"] = cj;
    j["delta"] = number(c.delta_ball);
    j["z_min_plus"] = number(c.z_min_plus);
    j["z_min_minus"] = number(c.z_min_minus);
    j["z_grid_density"] = c.grid_density;
    j["z_directions"] = c.directions;
    return j;
}

}  // namespace

bool RunReport::all_passed() const {
    for (const auto& c : certificates)
        if (c.status != CertStatus::certified_sampled) return false;
    for (const auto& p : probes)
        if (!p.passed) return false;
    return diagnostics.empty();
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_json(const RunReport& r) {
    Json j;
    j["schema"] = 1;
    j["tool"] = "lipspray";
    j["version"] = kToolVersion;
    j["command"] = r.command;
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a64(r.input)));
    j["input_digest"] = digest;
    j["input"] = r.input.empty() ? Json::object() : Json::parse(r.input);
    j["seed"] = r.seed;
    j["passed"] = r.all_passed();
    Json certs = Json::array();
    for (const auto& c : r.certificates) certs.push_back(certificate_json(c));
    j["certificates"] = certs;
    Json probes = Json::array();
    for (const auto& p : r.probes) probes.push_back(probe_json(p));
    j["probes"] = probes;
    j["diagnostics"] = r.diagnostics;
    j["timing"] = {{"seconds", r.seconds}};
    return j.dump(2) + "\n";
}

ReportSummary summarize_report(const std::string& json_text, const std::string& file) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::precondition, "cannot parse report " + file + ": " + e.what());
    }
    if (!j.contains("schema") || j["schema"] != 1)
        throw Error(ErrorCode::precondition, "report " + file + " does not have schema 1");
    ReportSummary s;
    s.file = file;
    s.command = j.value("command", "");
    for (const auto& p : j.value("probes", Json::array())) s.probes.emplace_back(p.value("name", ""), p.value("passed", false));
    for (const auto& c : j.value("certificates", Json::array()))
        s.certified = s.certified && c.value("status", "") == "certified-sampled";
    if (!j.value("diagnostics", Json::array()).empty()) s.certified = false;
    return s;
}

void write_trajectory_csv(std::ostream& os, const GeodesicSolution& sol) {
    const int n = sol.x.empty() ? 0 : static_cast<int>(sol.x.front().size());
    os << "t";
    for (int i = 0; i < n; ++i) os << ",x" << i;
    for (int i = 0; i < n; ++i) os << ",v" << i;
    os << "\n";
    char buf[40];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf;
    };
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
        put(sol.t[k]);
        for (int i = 0; i < n; ++i) {
            os << ",";
            put(sol.x[k][i]);
        }
        for (int i = 0; i < n; ++i) {
            os << ",";
            put(sol.v[k][i]);
        }
        os << "\n";
    }
}

}  // namespace lipspray
