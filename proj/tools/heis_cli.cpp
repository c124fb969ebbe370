#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "heis/distortion.hpp"
#include "heis/geodesy.hpp"
#include "heis/io.hpp"
#include "heis/parallel.hpp"
#include "heis/verify.hpp"

using namespace heis;

namespace {

struct Globals {
  std::string config_path;
  std::string output;
  std::string format;
  unsigned threads = 0;
  bool dry_run = false;
};

json parse_json_arg(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) return json::parse(text);
  std::ifstream in(text);
  if (!in) throw std::invalid_argument("cannot open '" + text + "'");
  return json::parse(in);
}

ExperimentConfig resolve_config(const Globals& g) {
  ExperimentConfig c = g.config_path.empty() ? ExperimentConfig{} : config_from_json(parse_json_arg(g.config_path));
  if (const char* env = std::getenv("HEIS_SEED")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("HEIS_SEED is not an unsigned integer: ") + env);
    }
  }
  if (!g.output.empty()) c.output.path = g.output;
  if (!g.format.empty()) c.output.format = g.format;
  if (c.output.format != "json" && c.output.format != "csv") throw std::invalid_argument("format must be json or csv");
  return c;
}

void write_output(const ExperimentConfig& c, const std::string& json_text, const std::string& csv_text) {
  if (c.output.path.empty()) return;
  std::ofstream out(c.output.path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + c.output.path + "'");
  out << (c.output.format == "csv" ? csv_text : json_text);
}

std::string summary(const InequalityReport& r) {
  std::ostringstream os;
  os << r.name << " s=" << format_double(r.s) << " lhs=" << format_double(r.lhs) << " rhs=" << format_double(r.rhs)
     << " margin=" << format_double(r.margin) << " stderr=" << format_double(r.mc_stderr) << " -> "
     << to_string(r.holds);
  return os.str();
}

int emit_reports(const ExperimentConfig& c, const std::vector<InequalityReport>& reps) {
  json arr = json::array();
  std::string csv = std::string(kCsvHeader) + "\n";
  bool failed = false;
  for (const auto& r : reps) {
    arr.push_back(to_json(r));
    csv += csv_row(r) + "\n";
    std::cout << summary(r) << "\n";
    failed = failed || r.holds == Verdict::fails;
  }
  write_output(c, arr.dump(2) + "\n", csv);
  return failed ? 2 : 0;
}

SinkhornOptions sinkhorn_options(const ExperimentConfig& c) {
  SinkhornOptions o;
  if (c.solver.epsilon) o.epsilon = *c.solver.epsilon;
  return o;
}

std::vector<InequalityReport> run_cd(const ExperimentConfig& c, const SetSample& x, const Grid& grid) {
  CdOptions opt;
  opt.grid = grid;
  opt.method = c.solver.method;
  opt.sinkhorn = sinkhorn_options(c);
  return verify_cd_samples(x, c.s_values, opt);
}

std::vector<InequalityReport> run_bm(const ExperimentConfig& c, const SetSample& x, const Grid& grid, double r,
                                     bool bmi, bool sbmi) {
  BmOptions opt;
  opt.r = r;
  opt.grid = grid;
  opt.with_sbmi = sbmi;
  std::vector<InequalityReport> out;
  for (auto& rep : verify_bm_samples(x, c.s_values, opt)) {
    if (bmi) out.push_back(rep.bmi);
    if (sbmi) out.push_back(*rep.sbmi);
  }
  return out;
}

std::vector<InequalityReport> run_verifier(const std::string& which, const ExperimentConfig& c) {
  if (which == "cd") return run_cd(c, sample_sets(c.a, c.b, c.samples, c.seed), Grid::cubic(c.h));
  if (which == "bmi" || which == "sbmi" || which == "bm") {
    return run_bm(c, sample_sets(c.a, c.b, c.samples, c.seed), Grid::cubic(c.h), c.r, which != "sbmi",
                  which != "bmi");
  }
  if (which == "bbl") {
    std::vector<InequalityReport> out;
    for (double s : c.s_values) {
      if (s <= 0.0 || s >= 1.0) continue;
      const auto inst = bbl_set_instance(c.a, c.b, s, c.h, c.samples, c.seed);
      auto rep = verify_bbl(inst.f, inst.g, inst.h, s, c.p, c.samples, c.seed);
      rep.extras["theta"] = inst.theta;
      out.push_back(rep);
    }
    if (out.empty()) throw std::invalid_argument("verify-bbl needs s values strictly between 0 and 1");
    return out;
  }
  throw std::invalid_argument("unknown verifier '" + which + "'");
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw std::invalid_argument("--s expects lo:hi:step with step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(std::min(parts[1], parts[0] + static_cast<double>(k) * parts[2]));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heisenberg group geometry, optimal transport and curvature inequality checks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (JSON file or inline JSON)");
  app.add_option("--output", g.output, "Write the report to this path");
  app.add_option("--format", g.format, "Report format: json or csv");
  app.add_option("--threads", g.threads, "Cap on worker threads (0: hardware)");
  app.add_flag("--dry-run", g.dry_run, "Print the resolved config and exit");

  std::string x_text, y_text;
  auto* distance = app.add_subcommand("distance", "CC distance between two points");
  distance->add_option("x", x_text, "Point as a JSON array [xi1, eta1, ..., t]")->required();
  distance->add_option("y", y_text, "Point as a JSON array")->required();

  std::string chi_text;
  double theta = 0.0;
  std::size_t geo_samples = 10;
  auto* geodesic = app.add_subcommand("geodesic", "Points along the geodesic with data (chi, theta)");
  geodesic->add_option("chi", chi_text, "chi as a JSON array of 2n reals")->required();
  geodesic->add_option("theta", theta, "vertical angle in [-2pi, 2pi]")->required();
  geodesic->add_option("--samples", geo_samples, "number of intervals in [0, 1]");

  int tau_n = 1;
  double tau_s = 0.0, tau_theta = 0.0;
  auto* tau_cmd = app.add_subcommand("tau", "Distortion coefficient tau^n_s(theta)");
  tau_cmd->add_option("n", tau_n)->required();
  tau_cmd->add_option("s", tau_s)->required();
  tau_cmd->add_option("theta", tau_theta)->required();

  std::string a_text, b_text;
  auto* transport = app.add_subcommand("transport", "Optimal plan between uniform samples of two regions");
  transport->add_option("A", a_text, "Region as JSON (inline or file); default: the config's A");
  transport->add_option("B", b_text, "Region as JSON (inline or file); default: the config's B");

  auto* vcd = app.add_subcommand("verify-cd", "Entropy (CD) inequality");
  auto* vbmi = app.add_subcommand("verify-bmi", "Brunn-Minkowski inequality on the midpoint set");
  auto* vsbmi = app.add_subcommand("verify-sbmi", "Brunn-Minkowski inequality on the interpolant support");
  auto* vbbl = app.add_subcommand("verify-bbl", "Borell-Brascamp-Lieb inequality on an indicator instance");

  std::vector<int> depths{0, 1, 2, 3, 4, 5};
  int per_axis = 8;
  auto* step = app.add_subcommand("step-limit", "Step-measure approximation of a two-level density pair");
  step->add_option("--depths", depths, "Dyadic depths");
  step->add_option("--per-axis", per_axis, "Lattice points per axis");

  std::string range = "0:1:0.05";
  std::string verifier = "cd";
  auto* sweep = app.add_subcommand("sweep", "Run one verifier over a range of s");
  sweep->add_option("--s", range, "lo:hi:step");
  sweep->add_option("--verifier", verifier, "cd, bmi, sbmi or bbl");

  std::vector<double> lambdas{2.0, 4.0};
  std::string dil_verifier = "all";
  auto* dilate = app.add_subcommand("dilate-check", "Rerun on dilated samples and compare");
  dilate->add_option("--lambda", lambdas, "Dilation factors");
  dilate->add_option("--verifier", dil_verifier, "cd, bm or all");

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    set_max_threads(g.threads);
    const ExperimentConfig cfg = resolve_config(g);
    if (g.dry_run) {
      std::cout << to_json(cfg).dump(2) << "\n";
      return 0;
    }

    if (distance->parsed()) {
      const auto x = point_from_json(parse_json_arg(x_text));
      const auto y = point_from_json(parse_json_arg(y_text));
      const double d = cc_distance(x, y);
      std::cout << "d = " << format_double(d) << "\n";
      json j{{"x", to_json(x)}, {"y", to_json(y)}, {"distance", d}, {"angle", angle(x, y)}};
      write_output(cfg, j.dump(2) + "\n", "distance,angle\n" + format_double(d) + "," + format_double(angle(x, y)) + "\n");
      return 0;
    }
    if (geodesic->parsed()) {
      GeodesicParam p{parse_json_arg(chi_text).get<std::vector<double>>(), theta};
      if (p.chi.empty() || p.chi.size() % 2 != 0) throw std::invalid_argument("chi needs 2n reals");
      if (geo_samples == 0) throw std::invalid_argument("--samples must be positive");
      json arr = json::array();
      std::string csv = "s";
      for (int k = 0; k < p.n(); ++k) csv += ",xi" + std::to_string(k + 1) + ",eta" + std::to_string(k + 1);
      csv += ",t\n";
      for (std::size_t k = 0; k <= geo_samples; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(geo_samples);
        const auto pt = gamma(s, p);
        arr.push_back({{"s", s}, {"point", to_json(pt)}});
        csv += format_double(s);
        for (double c : pt.coords()) csv += "," + format_double(c);
        csv += "\n";
      }
      std::cout << "geodesic length " << format_double(p.chi_norm()) << ", endpoint "
                << to_json(gamma(1.0, p)).dump() << "\n";
      write_output(cfg, arr.dump(2) + "\n", csv);
      return 0;
    }
    if (tau_cmd->parsed()) {
      const double v = tau(tau_n, tau_s, tau_theta);
      std::cout << format_double(v) << "\n";
      write_output(cfg, json{{"n", tau_n}, {"s", tau_s}, {"theta", tau_theta}, {"tau", v}}.dump(2) + "\n",
                   "n,s,theta,tau\n" + std::to_string(tau_n) + "," + format_double(tau_s) + "," +
                       format_double(tau_theta) + "," + format_double(v) + "\n");
      return 0;
    }
    if (transport->parsed()) {
      const Region a = !a_text.empty() ? region_from_json(parse_json_arg(a_text)) : cfg.a;
      const Region b = !b_text.empty() ? region_from_json(parse_json_arg(b_text)) : cfg.b;
      const auto x = sample_sets(a, b, cfg.samples, cfg.seed);
      const auto c = cost_matrix(x.a, x.b);
      const std::vector<double> w(cfg.samples, 1.0 / static_cast<double>(cfg.samples));
      const auto plan = cfg.solver.method == Method::exact_lp ? solve_exact(c, w, w)
                                                              : solve_sinkhorn(c, w, w, sinkhorn_options(cfg));
      const double w2v = std::sqrt(std::max(0.0, plan.cost));
      std::cout << "W2 = " << format_double(w2v) << " (" << plan.pairs.size() << " pairs, "
                << (plan.method == Method::exact_lp ? "exact" : "sinkhorn") << ")\n";
      json j = to_json(plan);
      j["w2"] = w2v;
      std::string csv = "i,j,mass\n";
      for (const auto& p : plan.pairs) {
        csv += std::to_string(p.i) + "," + std::to_string(p.j) + "," + format_double(p.mass) + "\n";
      }
      write_output(cfg, j.dump(2) + "\n", csv);
      return 0;
    }
    if (vcd->parsed()) return emit_reports(cfg, run_verifier("cd", cfg));
    if (vbmi->parsed()) return emit_reports(cfg, run_verifier("bmi", cfg));
    if (vsbmi->parsed()) return emit_reports(cfg, run_verifier("sbmi", cfg));
    if (vbbl->parsed()) return emit_reports(cfg, run_verifier("bbl", cfg));
    if (sweep->parsed()) {
      ExperimentConfig c = cfg;
      c.s_values = parse_range(range);
      return emit_reports(c, run_verifier(verifier, c));
    }
    if (step->parsed()) {
      const auto inst = two_level_instance(per_axis);
      const auto rows = step_limit_experiment(inst.mu, inst.k_mu, inst.nu, inst.k_nu, depths, 0.5);
      json arr = json::array();
      std::string csv = "depth,w2_source,w2_target,functional\n";
      bool monotone = true;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        arr.push_back({{"depth", r.depth}, {"w2_source", r.w2_source}, {"w2_target", r.w2_target},
                       {"functional", json_number(r.functional)}});
        csv += std::to_string(r.depth) + "," + format_double(r.w2_source) + "," + format_double(r.w2_target) + "," +
               format_double(r.functional) + "\n";
        std::cout << "depth " << (r.depth < 0 ? std::string("exact") : std::to_string(r.depth)) << ": W2 source "
                  << format_double(r.w2_source) << ", W2 target " << format_double(r.w2_target) << ", F "
                  << format_double(r.functional) << "\n";
        if (k > 0 && r.depth >= 0 && rows[k - 1].depth >= 0 && r.depth > rows[k - 1].depth) {
          monotone = monotone && r.w2_source <= rows[k - 1].w2_source + 1e-9 &&
                     r.w2_target <= rows[k - 1].w2_target + 1e-9;
        }
      }
      write_output(cfg, arr.dump(2) + "\n", csv);
      return monotone ? 0 : 2;
    }
    if (dilate->parsed()) {
      const auto base = sample_sets(cfg.a, cfg.b, cfg.samples, cfg.seed);
      const Grid grid = Grid::cubic(cfg.h);
      const bool cd = dil_verifier == "cd" || dil_verifier == "all";
      const bool bm = dil_verifier == "bm" || dil_verifier == "all";
      if (!cd && !bm) throw std::invalid_argument("--verifier must be cd, bm or all");
      auto run_all = [&](const SetSample& x, const Grid& gr, double r) {
        std::vector<InequalityReport> out;
        if (cd) out = run_cd(cfg, x, gr);
        if (bm) {
          auto more = run_bm(cfg, x, gr, r, true, true);
          out.insert(out.end(), more.begin(), more.end());
        }
        return out;
      };
      const auto ref = run_all(base, grid, cfg.r);
      std::vector<InequalityReport> all = ref;
      bool invariant = true;
      for (double lambda : lambdas) {
        auto reps = run_all(dilated(base, lambda), grid.dilated(lambda), cfg.r * lambda);
        for (std::size_t k = 0; k < reps.size(); ++k) {
          const bool same_theta = reps[k].extras["theta"] == ref[k].extras.at("theta");
          const bool same_verdict = reps[k].holds == ref[k].holds;
          reps[k].extras["lambda"] = lambda;
          reps[k].extras["theta_identical"] = same_theta ? 1.0 : 0.0;
          reps[k].extras["verdict_unchanged"] = same_verdict ? 1.0 : 0.0;
          invariant = invariant && same_theta && same_verdict;
        }
        all.insert(all.end(), reps.begin(), reps.end());
      }
      const int code = emit_reports(cfg, all);
      std::cout << "dilation invariance: " << (invariant ? "theta and verdicts unchanged" : "CHANGED") << "\n";
      return invariant ? code : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
