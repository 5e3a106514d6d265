// Command-line front end: deconvolve, forward, moments, scenario, spectrum.
// Exit status 0 on success, 2 on bad input, 3 on numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "freedeconv/contour.hpp"
#include "freedeconv/deconvolution.hpp"
#include "freedeconv/experiments.hpp"
#include "freedeconv/io.hpp"
#include "freedeconv/moments.hpp"

using namespace freedeconv;

namespace {

void emit_json(const std::string& out, const json& j) {
  if (out.empty() || out == "-") std::cout << j.dump(2) << '\n';
  else write_json_file(out, j);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int x = std::stoi(item, &used);
      if (used != item.size() || x <= 0) throw std::invalid_argument(item);
      v.push_back(x);
    } catch (const std::exception&) {
      throw ContractViolation("--n expects a comma-separated list of positive integers, got '" + s + "'");
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free multiplicative deconvolution of empirical spectra against Marchenko-Pastur"};
  app.require_subcommand(1);

  // deconvolve
  std::string input, out, dump_dir;
  double c = 0.0;
  DeconvConfig cfg;
  auto* dec = app.add_subcommand("deconvolve", "estimate the population measure from an empirical spectrum");
  dec->add_option("--input", input, "empirical spectral measure (JSON)")->required();
  dec->add_option("--c", c, "aspect ratio p/n in (0, 1)")->required();
  dec->add_option("--nodes", cfg.contour_nodes, "initial m-contour nodes")->capture_default_str();
  dec->add_option("--max-support", cfg.max_support, "largest number of atoms")->capture_default_str();
  dec->add_option("--rank-tol", cfg.rank_tol, "relative Hankel pivot for rank truncation")->capture_default_str();
  dec->add_option("--margin", cfg.contour_margin, "relative clearance of the m-circle from slits")
      ->capture_default_str();
  dec->add_option("--out", out, "result JSON (default: stdout)");
  dec->add_option("--dump-contours", dump_dir, "directory for m- and z-contour CSV dumps");

  // forward
  std::string population;
  int forward_nodes = 512;
  auto* fwd = app.add_subcommand("forward", "contour of G for population [x] MP_c");
  fwd->add_option("--population", population, "population measure (JSON)")->required();
  fwd->add_option("--c", c, "aspect ratio p/n in (0, 1)")->required();
  fwd->add_option("--nodes", forward_nodes, "minimum contour nodes")->capture_default_str();
  fwd->add_option("--out", out, "contour CSV")->required();

  // moments
  double moment_tol = 1e-8;
  int max_support = 8;
  auto* mom = app.add_subcommand("moments", "recover a discrete measure from moments");
  mom->add_option("--input", input, "moments m_0, m_1, ... (JSON array)")->required();
  mom->add_option("--max-support", max_support, "largest number of atoms")->capture_default_str();
  mom->add_option("--tol", moment_tol, "relative Hankel pivot for rank truncation")->capture_default_str();
  mom->add_option("--out", out, "measure JSON (default: stdout)");

  // scenario
  std::string id, n_list = "250,500,1000,2000", method = "contour";
  int seeds = 20;
  unsigned threads = 0;
  BaselineOptions baseline;
  auto* scn = app.add_subcommand("scenario", "benchmark over sample sizes and seeds");
  scn->add_option("--id", id, "S1, S2_1, S2_2, S2_3 or S3")->required();
  scn->add_option("--n", n_list, "comma-separated sample sizes")->capture_default_str();
  scn->add_option("--method", method, "contour or subordination (the latter also runs contour)")
      ->capture_default_str();
  scn->add_option("--seeds", seeds, "seeds 1..N")->capture_default_str();
  scn->add_option("--sigma", baseline.sigma, "Cauchy smoothing of the subordination baseline")
      ->capture_default_str();
  scn->add_option("--ridge", baseline.ridge_alpha, "ridge parameter of the baseline")->capture_default_str();
  scn->add_option("--rank-tol", cfg.rank_tol, "relative Hankel pivot for rank truncation")->capture_default_str();
  scn->add_option("--max-support", cfg.max_support, "largest number of atoms")->capture_default_str();
  scn->add_option("--threads", threads, "worker threads (0 = all cores)");
  scn->add_option("--out", out, "report CSV (default: stdout)");

  // spectrum
  int p = 0, n = 0;
  std::uint64_t seed = 1;
  auto* spc = app.add_subcommand("spectrum", "sample an empirical spectrum");
  spc->add_option("--scenario", id, "S1, S2_1, S2_2, S2_3 or S3")->required();
  spc->add_option("--p", p, "dimension")->required();
  spc->add_option("--n", n, "sample size")->required();
  spc->add_option("--seed", seed, "generator seed")->capture_default_str();
  spc->add_option("--out", out, "measure JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*dec) {
      const DiscreteMeasure mu = measure_from_json(read_json_file(input));
      const DeconvResult res = deconvolve(mu, c, cfg);
      if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        ContourRepresentation m_rep;
        m_rep.sigma = res.m_contour;
        m_rep.value = res.t_values;
        write_contour_csv((std::filesystem::path(dump_dir) / "m_contour.csv").string(), m_rep);
        write_contour_csv((std::filesystem::path(dump_dir) / "z_contour.csv").string(), res.z_contour);
      }
      emit_json(out, result_to_json(res));
    } else if (*fwd) {
      const DiscreteMeasure nu = measure_from_json(read_json_file(population));
      write_contour_csv(out, forward_contour(nu, c, forward_nodes));
    } else if (*mom) {
      const MomentSequence m = moments_from_json(read_json_file(input));
      emit_json(out, measure_to_json(recover_measure(m, max_support, moment_tol)));
    } else if (*scn) {
      const Scenario sc = scenario_by_id(id);
      if (seeds < 1) throw ContractViolation("--seeds must be positive");
      std::vector<std::uint64_t> seed_list;
      for (int s = 1; s <= seeds; ++s) seed_list.push_back(std::uint64_t(s));
      const std::vector<int> ns = parse_int_list(n_list);
      const Method m = method_from_string(method);
      std::vector<RunReport> reports = run_scenario(sc, ns, m, seed_list, cfg, baseline, threads);
      if (m == Method::subordination) {
        const auto contour = run_scenario(sc, ns, Method::contour, seed_list, cfg, baseline, threads);
        reports.insert(reports.end(), contour.begin(), contour.end());
      }
      for (const auto& r : reports)
        if (!r.error.empty())
          std::cerr << "run " << r.scenario << " n=" << r.n << " seed=" << r.seed << " " << to_string(r.method)
                    << " failed: " << r.error << '\n';
      if (out.empty() || out == "-") {
        write_reports_csv(std::cout, reports);
      } else {
        std::ofstream os(out);
        if (!os) throw ContractViolation("cannot open " + out + " for writing");
        write_reports_csv(os, reports);
      }
    } else if (*spc) {
      emit_json(out, measure_to_json(sample_spectrum(scenario_by_id(id), p, n, seed)));
    }
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure in stage " << e.stage() << " (" << to_string(e.kind()) << "): " << e.what()
              << '\n';
    return 3;
  }
  return 0;
}
