// Command-line front end: simulate, identify, estimate, mc, verify, dsep.
// Every subcommand is a pure function of its config and input files; reruns
// write byte-identical output.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mnar/errors.hpp"
#include "mnar/estimate.hpp"
#include "mnar/expansion.hpp"
#include "mnar/graph.hpp"
#include "mnar/identify.hpp"
#include "mnar/nuisance.hpp"
#include "mnar/perm_model.hpp"
#include "mnar/random_laws.hpp"
#include "mnar/rng.hpp"
#include "mnar/tabular.hpp"

namespace {

// Shortest round-trip decimal form; stable across runs and locales.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) mnar::fail(mnar::Errc::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) mnar::fail(mnar::Errc::ParseError, "cannot write " + path);
  out << content;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(csv);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Flags may be backfilled from a JSON config file; explicit flags win.
nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    mnar::fail(mnar::Errc::ParseError, std::string("config: ") + e.what());
  }
}

template <typename T>
void backfill(const CLI::Option* opt, const nlohmann::json& cfg,
              const char* key, T& slot) {
  if (opt->count() == 0 && cfg.contains(key)) slot = cfg.at(key).get<T>();
}

nlohmann::json echo_config(const std::string& subcommand,
                           std::initializer_list<std::pair<const char*, nlohmann::json>>
                               entries) {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  for (const auto& [k, v] : entries) j[k] = v;
  return j;
}

mnar::RhoSpec parse_rho(const std::string& text) {
  if (text == "estimate") return mnar::RhoSpec::estimated();
  if (text.rfind("known:", 0) == 0) {
    double v = std::strtod(text.c_str() + 6, nullptr);
    if (!(v > 0.0))
      mnar::fail(mnar::Errc::ParseError, "bad rho value in " + text);
    return mnar::RhoSpec::known(v);
  }
  mnar::fail(mnar::Errc::ParseError,
             "rho must be 'estimate' or 'known:<value>', got " + text);
}

int cmd_simulate(const std::string& law_path, std::size_t n,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& observed_out,
                 const std::string& full_out) {
  mnar::PermutationLaw law =
      mnar::permutation_law_from_json(read_file(law_path));
  if (!observed_out.empty())
    write_file(observed_out, mnar::law_to_json(mnar::observed_law(law)) + "\n");
  if (!full_out.empty())
    write_file(full_out, mnar::law_to_json(mnar::full_law(law)) + "\n");
  if (!out_path.empty()) {
    mnar::Dataset d = mnar::sample(law, n, seed);
    std::ostringstream ss;
    mnar::write_dataset_csv(d, ss);
    write_file(out_path, ss.str());
  }
  return 0;
}

int cmd_identify(const std::string& law_path, const std::string& out_path) {
  mnar::TabularLaw obs = mnar::law_from_json(read_file(law_path));
  std::ostringstream out;
  out << "# config " << echo_config("identify", {{"law", law_path}}).dump()
      << "\n";
  out << "quantity,x,value\n";
  out << "psi,," << fmt(mnar::psi_prop1(obs)) << "\n";
  out << "theta,," << fmt(mnar::theta_prop1(obs)) << "\n";

  // The odds-form block only applies to a binary outcome with
  // nondegenerate odds; otherwise the general functionals stand alone.
  bool binary = true;
  try {
    double rho = mnar::rho_of(obs);
    out << "rho,," << fmt(rho) << "\n";
    out << "theta_binary,," << fmt(mnar::theta_binary(obs)) << "\n";
  } catch (const mnar::Error& e) {
    if (e.code() != mnar::Errc::NotBinaryOutcome &&
        e.code() != mnar::Errc::DegenerateOdds)
      throw;
    binary = false;
  }
  if (binary) {
    const std::size_t xv = obs.var_index("X");
    for (const auto& x : obs.variables()[xv].support) {
      if (x == mnar::missing_token()) continue;
      auto dr = mnar::density_ratio_form(obs, x);
      out << "xi," << x << "," << fmt(mnar::xi_at(obs, x)) << "\n";
      out << "lambda," << x << "," << fmt(dr.lambda) << "\n";
      out << "posterior," << x << "," << fmt(dr.posterior_prob) << "\n";
    }
  }
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& method,
                 const std::string& target, std::size_t folds,
                 double smoothing, double clip_floor,
                 const std::string& rho_text, std::uint64_t seed,
                 const std::string& out_path) {
  std::ifstream in(data_path, std::ios::binary);
  if (!in) mnar::fail(mnar::Errc::ParseError, "cannot open " + data_path);
  mnar::Dataset d = mnar::read_dataset_csv(in);
  if (target != "theta" && target != "psi")
    mnar::fail(mnar::Errc::ParseError, "unknown target " + target);
  if (folds > 0 && method != "onestep")
    mnar::fail(mnar::Errc::ParseError,
               "cross-fitting is available for --method onestep only");

  mnar::FitConfig fit{smoothing, clip_floor};
  mnar::Estimate est;
  if (folds > 0) {
    est = mnar::crossfit(d, {folds, seed, fit});
  } else {
    mnar::NuisanceSet ns = mnar::fit_nuisances(d, fit);
    if (method == "plugin")
      est = mnar::plugin_theta(ns, d);
    else if (method == "onestep")
      est = mnar::onestep_theta(ns, d);
    else if (method == "onestep-binary")
      est = mnar::onestep_theta_binary(ns, d, parse_rho(rho_text));
    else
      mnar::fail(mnar::Errc::ParseError, "unknown method " + method);
  }
  if (target == "psi") est = mnar::psi_estimate(d, est);

  nlohmann::json j = nlohmann::json::parse(mnar::estimate_to_json(est));
  j["config"] = echo_config(
      "estimate", {{"data", data_path},
                   {"method", method},
                   {"target", target},
                   {"folds", folds},
                   {"smoothing", smoothing},
                   {"clip_floor", clip_floor},
                   {"rho", rho_text},
                   {"seed", seed}});
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  return 0;
}

int cmd_mc(const std::string& law_path, std::size_t n, std::size_t reps,
           std::uint64_t seed, const std::string& method,
           const std::string& target, double smoothing,
           const std::string& rho_text, std::size_t folds,
           const std::string& out_path) {
  mnar::PermutationLaw law =
      mnar::permutation_law_from_json(read_file(law_path));
  mnar::McConfig cfg;
  cfg.n = n;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.fit.pseudo_count = smoothing;
  cfg.rho = parse_rho(rho_text);
  cfg.folds = folds;
  if (method == "plugin")
    cfg.method = mnar::Method::plugin;
  else if (method == "onestep")
    cfg.method = mnar::Method::onestep_general;
  else if (method == "onestep-binary")
    cfg.method = mnar::Method::onestep_binary;
  else
    mnar::fail(mnar::Errc::ParseError, "unknown method " + method);
  if (target == "theta")
    cfg.target = mnar::McTarget::theta;
  else if (target == "psi")
    cfg.target = mnar::McTarget::psi;
  else
    mnar::fail(mnar::Errc::ParseError, "unknown target " + target);

  mnar::McResult res = mnar::monte_carlo(law, cfg);
  std::ostringstream out;
  out << "# config "
      << echo_config("mc", {{"law", law_path},
                            {"n", n},
                            {"reps", reps},
                            {"seed", seed},
                            {"method", method},
                            {"target", target},
                            {"smoothing", smoothing},
                            {"rho", rho_text},
                            {"folds", folds}})
             .dump()
      << "\n";
  out << "rep,value,se,ci_low,ci_high,covered\n";
  for (std::size_t r = 0; r < res.reps.size(); ++r) {
    const auto& rep = res.reps[r];
    out << r << ',' << fmt(rep.value) << ',';
    out << (rep.se ? fmt(*rep.se) : "") << ',';
    out << (rep.ci_low ? fmt(*rep.ci_low) : "") << ',';
    out << (rep.ci_high ? fmt(*rep.ci_high) : "") << ',';
    out << (rep.ci_low ? (rep.covered ? "1" : "0") : "") << "\n";
  }
  out << "summary,truth," << fmt(res.truth) << ",,,\n";
  out << "summary,bias," << fmt(res.mean_bias) << ",,,\n";
  out << "summary,sd," << fmt(res.sd_value) << ",,,\n";
  out << "summary,median_abs_bias," << fmt(res.median_abs_bias) << ",,,\n";
  out << "summary,coverage," << fmt(res.coverage) << ",,,\n";
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return 0;
}

void report_lines(std::ostream& out, const std::string& tag,
                  const mnar::ExpansionReport& rep) {
  out << tag << ",theta_p," << fmt(rep.theta_p) << "\n";
  out << tag << ",theta_pbar," << fmt(rep.theta_pbar) << "\n";
  out << tag << ",if_integral," << fmt(rep.if_integral) << "\n";
  out << tag << ",remainder_identity," << fmt(rep.remainder_identity) << "\n";
  if (rep.remainder_formula)
    out << tag << ",remainder_formula," << fmt(*rep.remainder_formula) << "\n";
  if (rep.identity_residual)
    out << tag << ",identity_residual," << fmt(*rep.identity_residual) << "\n";
  if (rep.binary_pieces) {
    out << tag << ",xi_varpi_term," << fmt(rep.binary_pieces->xi_varpi_term) << "\n";
    out << tag << ",strata_mix_term," << fmt(rep.binary_pieces->strata_mix_term) << "\n";
    out << tag << ",theta_shift_term," << fmt(rep.binary_pieces->theta_shift_term)
        << "\n";
    out << tag << ",s2_residual," << fmt(rep.binary_pieces->s2_residual) << "\n";
  }
}

int cmd_verify(const std::string& p_path, const std::string& pbar_path,
               std::size_t pairs, std::uint64_t seed, double tol,
               const std::string& eps_text, bool binary,
               const std::string& rho_text, const std::string& out_path) {
  std::vector<double> epsilons;
  for (const auto& tok : split_list(eps_text))
    epsilons.push_back(std::strtod(tok.c_str(), nullptr));

  std::ostringstream out;
  out << "# config "
      << echo_config("verify", {{"p", p_path},
                                {"pbar", pbar_path},
                                {"pairs", pairs},
                                {"seed", seed},
                                {"tol", tol},
                                {"epsilons", eps_text},
                                {"binary", binary},
                                {"rho", rho_text}})
             .dump()
      << "\n";
  out << "pair,quantity,value\n";
  bool ok = true;

  auto run_pair = [&](const std::string& tag, const mnar::TabularLaw& p,
                      const mnar::TabularLaw& pbar) {
    mnar::ExpansionReport rep = mnar::expansion_check(p, pbar);
    report_lines(out, tag, rep);
    ok = ok && *rep.identity_residual <= tol;
    double mz = mnar::influence_mean_general(p);
    out << tag << ",influence_mean," << fmt(mz) << "\n";
    ok = ok && std::abs(mz) <= tol;
    if (binary) {
      double rho = rho_text == "estimate" ? mnar::rho_of(p)
                                          : parse_rho(rho_text).value;
      mnar::ExpansionReport brep = mnar::expansion_check_binary(p, pbar, rho);
      report_lines(out, tag + "_binary", brep);
      double bmz = mnar::influence_mean_binary(p, rho);
      out << tag << "_binary,influence_mean," << fmt(bmz) << "\n";
      ok = ok && std::abs(bmz) <= tol;
    }
    if (!epsilons.empty()) {
      mnar::DecayReport scan = mnar::second_order_scan(p, pbar, epsilons);
      for (std::size_t i = 0; i < scan.epsilons.size(); ++i) {
        out << tag << ",scan_eps_" << fmt(scan.epsilons[i]) << ","
            << fmt(scan.remainders[i]) << "\n";
      }
      for (std::size_t i = 0; i < scan.decay_ratios.size(); ++i)
        out << tag << ",decay_ratio_" << i << "," << fmt(scan.decay_ratios[i])
            << "\n";
    }
  };

  if (!p_path.empty() && !pbar_path.empty()) {
    run_pair("input", mnar::law_from_json(read_file(p_path)),
             mnar::law_from_json(read_file(pbar_path)));
  } else {
    for (std::size_t i = 0; i < pairs; ++i) {
      auto [mp, mq] = mnar::random_permutation_pair(
          mnar::derive_seed(seed, i), 2 + i % 3);
      run_pair("pair" + std::to_string(i), mnar::observed_law(mp),
               mnar::observed_law(mq));
    }
  }

  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return ok ? 0 : 2;
}

int cmd_dsep(const std::string& graph_path, const std::string& a,
             const std::string& b, const std::string& z) {
  mnar::Dag g = mnar::parse_graph_spec(read_file(graph_path));
  mnar::DsepResult res =
      mnar::d_separated_ex(g, split_list(a), split_list(b), split_list(z));
  std::cout << "separated: " << (res.separated ? "true" : "false") << "\n";
  std::cout << "deterministic-path-warning: "
            << (res.deterministic_warning ? "true" : "false") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact identification, estimation, and expansion checking "
               "for two-stage missingness models"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with flag defaults");

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a dataset from a law");
  std::string sim_law, sim_out, sim_obs_out, sim_full_out;
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 1;
  auto* sim_law_opt = sim->add_option("--law", sim_law, "permutation law JSON");
  auto* sim_n_opt = sim->add_option("--n", sim_n, "sample size");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "master seed");
  auto* sim_out_opt = sim->add_option("--out", sim_out, "dataset CSV path");
  sim->add_option("--observed-law-out", sim_obs_out,
                  "also write the observed law JSON");
  sim->add_option("--full-law-out", sim_full_out,
                  "also write the full law JSON");

  // identify
  auto* ident = app.add_subcommand("identify",
                                   "evaluate identification functionals");
  std::string id_law, id_out;
  auto* id_law_opt = ident->add_option("--law", id_law, "observed law JSON");
  auto* id_out_opt = ident->add_option("--out", id_out, "output CSV path");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate theta from a dataset");
  std::string est_data, est_method = "onestep", est_target = "theta",
              est_rho = "estimate", est_out;
  std::size_t est_folds = 0;
  double est_smooth = 0.5, est_clip = 1e-6;
  std::uint64_t est_seed = 1;
  auto* est_data_opt = est->add_option("--data", est_data, "dataset CSV");
  auto* est_method_opt = est->add_option(
      "--method", est_method, "plugin | onestep | onestep-binary");
  auto* est_target_opt =
      est->add_option("--target", est_target, "theta | psi");
  auto* est_folds_opt =
      est->add_option("--folds", est_folds, "cross-fitting folds (0 = none)");
  auto* est_smooth_opt =
      est->add_option("--smoothing", est_smooth, "pseudo-count per cell");
  auto* est_clip_opt =
      est->add_option("--clip-floor", est_clip, "probability clipping floor");
  auto* est_rho_opt =
      est->add_option("--rho", est_rho, "estimate | known:<value>");
  auto* est_seed_opt = est->add_option("--seed", est_seed, "fold seed");
  auto* est_out_opt = est->add_option("--out", est_out, "output JSON path");

  // mc
  auto* mc = app.add_subcommand("mc", "seeded replication study");
  std::string mc_law, mc_method = "onestep", mc_target = "theta",
              mc_rho = "estimate", mc_out;
  std::size_t mc_n = 4000, mc_reps = 500, mc_folds = 0;
  double mc_smooth = 0.5;
  std::uint64_t mc_seed = 1;
  auto* mc_law_opt = mc->add_option("--law", mc_law, "permutation law JSON");
  auto* mc_n_opt = mc->add_option("--n", mc_n, "per-replication sample size");
  auto* mc_reps_opt = mc->add_option("--reps", mc_reps, "replications");
  auto* mc_seed_opt = mc->add_option("--seed", mc_seed, "master seed");
  auto* mc_method_opt = mc->add_option("--method", mc_method,
                                       "plugin | onestep | onestep-binary");
  auto* mc_target_opt = mc->add_option("--target", mc_target, "theta | psi");
  auto* mc_smooth_opt =
      mc->add_option("--smoothing", mc_smooth, "pseudo-count per cell");
  auto* mc_rho_opt = mc->add_option("--rho", mc_rho, "estimate | known:<value>");
  auto* mc_folds_opt =
      mc->add_option("--folds", mc_folds, "cross-fitting folds (0 = none)");
  auto* mc_out_opt = mc->add_option("--out", mc_out, "output CSV path");

  // verify
  auto* ver = app.add_subcommand("verify", "expansion identity checks");
  std::string ver_p, ver_pbar, ver_eps = "0.2,0.1,0.05,0.025",
              ver_rho = "estimate", ver_out;
  std::size_t ver_pairs = 0;
  std::uint64_t ver_seed = 1;
  double ver_tol = 1e-10;
  bool ver_binary = false;
  auto* ver_p_opt = ver->add_option("--p", ver_p, "law JSON for P");
  auto* ver_pbar_opt = ver->add_option("--pbar", ver_pbar, "law JSON for Pbar");
  auto* ver_pairs_opt =
      ver->add_option("--pairs", ver_pairs, "random pairs to generate");
  auto* ver_seed_opt = ver->add_option("--seed", ver_seed, "pair seed");
  auto* ver_tol_opt = ver->add_option("--tol", ver_tol, "identity tolerance");
  auto* ver_eps_opt =
      ver->add_option("--epsilons", ver_eps, "halving path, comma separated");
  ver->add_flag("--binary", ver_binary, "also run the binary-outcome form");
  auto* ver_rho_opt = ver->add_option("--rho", ver_rho,
                                      "estimate | known:<value> (binary form)");
  auto* ver_out_opt = ver->add_option("--out", ver_out, "output CSV path");

  // dsep
  auto* ds = app.add_subcommand("dsep", "d-separation query on a graph file");
  std::string ds_graph, ds_a, ds_b, ds_z;
  auto* ds_graph_opt = ds->add_option("--graph", ds_graph, "graph spec file");
  auto* ds_a_opt = ds->add_option("--a", ds_a, "first node set, comma separated");
  auto* ds_b_opt = ds->add_option("--b", ds_b, "second node set");
  ds->add_option("--z", ds_z, "conditioning set (may be empty)");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json cfg = load_config(config_path);
    if (sim->parsed()) {
      backfill(sim_law_opt, cfg, "law", sim_law);
      backfill(sim_n_opt, cfg, "n", sim_n);
      backfill(sim_seed_opt, cfg, "seed", sim_seed);
      backfill(sim_out_opt, cfg, "out", sim_out);
      if (sim_law.empty())
        mnar::fail(mnar::Errc::ParseError, "simulate needs --law");
      return cmd_simulate(sim_law, sim_n, sim_seed, sim_out, sim_obs_out,
                          sim_full_out);
    }
    if (ident->parsed()) {
      backfill(id_law_opt, cfg, "law", id_law);
      backfill(id_out_opt, cfg, "out", id_out);
      if (id_law.empty())
        mnar::fail(mnar::Errc::ParseError, "identify needs --law");
      return cmd_identify(id_law, id_out);
    }
    if (est->parsed()) {
      backfill(est_data_opt, cfg, "data", est_data);
      backfill(est_method_opt, cfg, "method", est_method);
      backfill(est_target_opt, cfg, "target", est_target);
      backfill(est_folds_opt, cfg, "folds", est_folds);
      backfill(est_smooth_opt, cfg, "smoothing", est_smooth);
      backfill(est_clip_opt, cfg, "clip_floor", est_clip);
      backfill(est_rho_opt, cfg, "rho", est_rho);
      backfill(est_seed_opt, cfg, "seed", est_seed);
      backfill(est_out_opt, cfg, "out", est_out);
      if (est_data.empty())
        mnar::fail(mnar::Errc::ParseError, "estimate needs --data");
      return cmd_estimate(est_data, est_method, est_target, est_folds,
                          est_smooth, est_clip, est_rho, est_seed, est_out);
    }
    if (mc->parsed()) {
      backfill(mc_law_opt, cfg, "law", mc_law);
      backfill(mc_n_opt, cfg, "n", mc_n);
      backfill(mc_reps_opt, cfg, "reps", mc_reps);
      backfill(mc_seed_opt, cfg, "seed", mc_seed);
      backfill(mc_method_opt, cfg, "method", mc_method);
      backfill(mc_target_opt, cfg, "target", mc_target);
      backfill(mc_smooth_opt, cfg, "smoothing", mc_smooth);
      backfill(mc_rho_opt, cfg, "rho", mc_rho);
      backfill(mc_folds_opt, cfg, "folds", mc_folds);
      backfill(mc_out_opt, cfg, "out", mc_out);
      if (mc_law.empty()) mnar::fail(mnar::Errc::ParseError, "mc needs --law");
      return cmd_mc(mc_law, mc_n, mc_reps, mc_seed, mc_method, mc_target,
                    mc_smooth, mc_rho, mc_folds, mc_out);
    }
    if (ver->parsed()) {
      backfill(ver_p_opt, cfg, "p", ver_p);
      backfill(ver_pbar_opt, cfg, "pbar", ver_pbar);
      backfill(ver_pairs_opt, cfg, "pairs", ver_pairs);
      backfill(ver_seed_opt, cfg, "seed", ver_seed);
      backfill(ver_tol_opt, cfg, "tol", ver_tol);
      backfill(ver_eps_opt, cfg, "epsilons", ver_eps);
      backfill(ver_rho_opt, cfg, "rho", ver_rho);
      backfill(ver_out_opt, cfg, "out", ver_out);
      if ((ver_p.empty() || ver_pbar.empty()) && ver_pairs == 0)
        mnar::fail(mnar::Errc::ParseError,
                   "verify needs --p/--pbar or --pairs");
      return cmd_verify(ver_p, ver_pbar, ver_pairs, ver_seed, ver_tol, ver_eps,
                        ver_binary, ver_rho, ver_out);
    }
    if (ds->parsed()) {
      backfill(ds_graph_opt, cfg, "graph", ds_graph);
      backfill(ds_a_opt, cfg, "a", ds_a);
      backfill(ds_b_opt, cfg, "b", ds_b);
      if (ds_graph.empty() || ds_a.empty() || ds_b.empty())
        mnar::fail(mnar::Errc::ParseError, "dsep needs --graph, --a, --b");
      return cmd_dsep(ds_graph, ds_a, ds_b, ds_z);
    }
  } catch (const mnar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
