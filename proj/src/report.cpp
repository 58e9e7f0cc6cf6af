#include <cmath>
#include <sstream>

#include "trapscope/cli.hpp"

namespace trapscope {

namespace {

using Json = nlohmann::ordered_json;

Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json criterion_json(const Criterion& c) {
  Json j;
  j["quantity"] = c.quantity;
  j["measured"] = number(c.measured);
  j["relation"] = c.relation;
  j["threshold"] = number(c.threshold);
  j["passed"] = c.passed;
  return j;
}

Json tolerances_json(const CertificateTolerances& t) {
  Json j;
  j["stationarity_analytic"] = t.stationarity_analytic;
  j["stationarity_fit"] = t.stationarity_fit;
  j["descent_relative"] = t.descent_relative;
  j["identity_relative"] = t.identity_relative;
  j["flatness_analytic"] = t.flatness_analytic;
  j["fit_absolute"] = t.fit_absolute;
  j["fit_relative"] = t.fit_relative;
  j["nonneg_floor"] = t.nonneg_floor;
  j["dyson_convergence"] = t.dyson_convergence;
  j["lie"] = t.lie;
  return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const TrapReport& r) {
  Json doc;
  doc["schema"] = "trapscope/1";
  doc["passed"] = r.passed;
  doc["claimed_order"] = r.claimed_order;

  Json inst;
  inst["N"] = r.levels;
  inst["a"] = r.a;
  inst["b"] = r.b;
  inst["omega"] = r.a - r.b;
  inst["T"] = r.horizon;
  inst["v"] = r.couplings;
  inst["lambda_raw"] = r.raw_eigenvalues;
  inst["lambda"] = r.eigenvalues;
  inst["lambda_shift"] = r.shift;
  inst["initial_level"] = r.levels;
  doc["instance"] = inst;

  const auto& c = r.config;
  Json settings;
  settings["M"] = c.segments;
  settings["substeps"] = c.substeps;
  settings["directions"] = c.directions;
  settings["seed"] = c.seed;
  settings["amplitude"] = c.amplitude;
  settings["fit_order"] = 2 * r.levels - 2 + c.fit_extra_orders;
  settings["fit_radius"] = c.fit_radius;
  settings["witness_budget"] = c.witness_budget;
  settings["witness_horizons"] = c.witness_horizons;
  settings["witness_amplitudes"] = {c.witness_amplitudes.first, c.witness_amplitudes.second};
  settings["lie_max_depth"] = c.lie_max_depth;
  settings["tolerances"] = tolerances_json(c.tolerances);
  doc["settings"] = settings;

  Json checks = Json::array();
  for (const auto& check : r.checks) {
    Json j;
    j["name"] = check.name;
    j["passed"] = check.passed;
    j["required"] = check.required;
    Json crit = Json::array();
    for (const auto& cr : check.criteria) crit.push_back(criterion_json(cr));
    j["criteria"] = crit;
    checks.push_back(j);
  }
  doc["checks"] = checks;

  Json dirs = Json::array();
  for (const auto& d : r.directions) {
    Json j;
    j["seed"] = d.seed;
    j["mean_zero"] = d.mean_zero;
    j["integral"] = d.integral;
    j["norm"] = d.norm;
    j["substeps"] = d.substeps;
    j["dyson_relative_change"] = d.dyson_change;
    Json diffs = Json::array();
    for (double x : d.differentials) diffs.push_back(number(x));
    j["differentials"] = diffs;
    j["order_2N-2_value"] = d.order_2N2 ? number(*d.order_2N2) : Json(nullptr);
    Json fit;
    fit["max_order"] = d.fit.max_order;
    fit["radius"] = d.fit.radius;
    fit["shrinks"] = d.fit.shrinks;
    fit["accepted"] = d.fit.accepted;
    fit["residual"] = number(d.fit.residual);
    fit["condition"] = number(d.fit.condition);
    Json coeffs = Json::array();
    for (double x : d.fit.coefficients) coeffs.push_back(number(x));
    fit["coefficients"] = coeffs;
    j["fit"] = fit;
    j["remainder_max"] = number(d.remainder_max);
    j["remainder_tolerance"] = number(d.remainder_tolerance);
    j["remainder_epsilon"] = number(d.remainder_epsilon);
    dirs.push_back(j);
  }
  doc["directions"] = dirs;

  if (r.lie) {
    Json lie;
    lie["dimension"] = r.lie->dimension;
    lie["required_dimension"] = r.levels * r.levels - 1;
    lie["saturated"] = r.lie->saturated;
    lie["depth_reached"] = r.lie->depth_reached;
    lie["tolerance"] = r.lie->tolerance;
    doc["lie_algebra"] = lie;
  } else {
    doc["lie_algebra"] = nullptr;
  }

  Json witness = Json::array();
  for (const auto& w : r.witness) {
    Json j;
    j["T"] = w.horizon;
    j["J"] = number(w.value);
    j["J_raw"] = number(w.raw_value);
    j["threshold"] = number(w.threshold);
    j["success"] = w.success;
    j["evaluations"] = w.evaluations;
    witness.push_back(j);
  }
  doc["witness"] = witness;
  doc["witness_found"] = r.witness_found;

  if (r.failure) {
    doc["failure"] = {{"stage", r.failure->stage}, {"message", r.failure->message}};
  } else {
    doc["failure"] = nullptr;
  }
  return doc;
}

std::string report_summary(const nlohmann::ordered_json& doc) {
  std::ostringstream out;
  const auto& inst = doc.at("instance");
  out << "trapscope certificate (" << doc.at("schema").get<std::string>() << ")\n";
  out << "  N = " << inst.at("N") << ", a = " << inst.at("a") << ", b = " << inst.at("b") << ", T = " << inst.at("T")
      << "\n";
  out << "  v = " << inst.at("v").dump() << "\n";
  out << "  lambda = " << inst.at("lambda_raw").dump() << " (shift " << inst.at("lambda_shift") << ")\n";
  out << "  claimed trap order: " << doc.at("claimed_order") << "\n\n";
  for (const auto& check : doc.at("checks")) {
    const bool passed = check.at("passed").get<bool>();
    const bool required = check.at("required").get<bool>();
    out << (passed ? "  [PASS] " : (required ? "  [FAIL] " : "  [MISS] ")) << check.at("name").get<std::string>()
        << (required ? "" : " (informational)") << "\n";
    for (const auto& c : check.at("criteria")) {
      out << "         " << c.at("quantity").get<std::string>() << " = " << c.at("measured").dump() << "  "
          << c.at("relation").get<std::string>() << " " << c.at("threshold").dump() << "\n";
    }
  }
  if (!doc.at("failure").is_null()) {
    out << "\n  stage failure in " << doc.at("failure").at("stage").get<std::string>() << ": "
        << doc.at("failure").at("message").get<std::string>() << "\n";
  }
  out << "\n  verdict: " << (doc.at("passed").get<bool>() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace trapscope
