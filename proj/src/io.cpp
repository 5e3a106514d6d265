#include "freedeconv/io.hpp"

#include <cmath>
#include <fstream>

namespace freedeconv {

namespace {

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw ContractViolation(std::string(what) + " must be a JSON array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ContractViolation(std::string(what) + " must contain only numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

// JSON has no NaN or infinity; encode them as null
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json measure_to_json(const DiscreteMeasure& mu) {
  return {{"atoms", std::vector<double>(mu.atoms().data(), mu.atoms().data() + mu.size())},
          {"weights", std::vector<double>(mu.weights().data(), mu.weights().data() + mu.size())}};
}

DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    throw ContractViolation("measure JSON needs \"atoms\" and \"weights\" arrays");
  std::vector<double> x = numbers(j.at("atoms"), "atoms");
  std::vector<double> w = numbers(j.at("weights"), "weights");
  if (x.size() != w.size()) throw ContractViolation("atoms and weights differ in length");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw ContractViolation("measure atoms must be strictly ascending");
  return DiscreteMeasure(Eigen::Map<Eigen::VectorXd>(x.data(), Eigen::Index(x.size())),
                         Eigen::Map<Eigen::VectorXd>(w.data(), Eigen::Index(w.size())));
}

json moments_to_json(const MomentSequence& m) { return m.values(); }

MomentSequence moments_from_json(const json& j) { return MomentSequence(numbers(j, "moments")); }

json result_to_json(const DeconvResult& r) {
  const DeconvDiagnostics& d = r.diagnostics;
  const DeconvConfig& c = r.config;
  return {
      {"estimate", measure_to_json(r.estimate)},
      {"moments_used", moments_to_json(r.moments_used)},
      {"diagnostics",
       {{"imag_residue", d.imag_residue},
        {"mass_defect", d.mass_defect},
        {"rank", d.rank},
        {"support_used", d.support_used},
        {"contour_radius", d.contour_radius},
        {"contour_nodes", d.contour_nodes},
        {"branch_points", d.branch_points},
        {"lift_steps", d.lift_steps},
        {"lift_rejected_steps", d.lift_rejected},
        {"newton_iterations", d.newton_iterations},
        {"lift_residual", number_or_null(d.lift_residual)},
        {"pivots", d.pivots},
        {"notes", d.notes},
        {"t_ramification_s", d.t_ramification_s},
        {"t_lift_s", d.t_lift_s},
        {"t_recovery_s", d.t_recovery_s}}},
      {"config",
       {{"c", r.c},
        {"contour_margin", c.contour_margin},
        {"contour_nodes", c.contour_nodes},
        {"max_contour_nodes", c.max_contour_nodes},
        {"node_convergence_tol", c.node_convergence_tol},
        {"max_moments", c.moment_count()},
        {"newton_tol", c.newton_tol},
        {"min_step", c.min_step},
        {"rank_tol", c.rank_tol},
        {"max_support", c.max_support},
        {"contour_noise_tol", c.contour_noise_tol}}},
  };
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractViolation("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ContractViolation(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ContractViolation("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

}  // namespace freedeconv
