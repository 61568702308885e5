#pragma once

// Command-line driver. run_cli() is the whole program minus main(), so the
// same code path can be exercised in-process.
//
// Exit codes: 0 pass, 1 other runtime failure, 2 check failed,
// 3 degenerate Lagrangian, 4 Newton divergence, 5 HJ hypothesis violated,
// 6 bad command line, config or parameters.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "algmech/dirac.hpp"
#include "algmech/models.hpp"

namespace algmech::cli {

enum ExitCode { kPass = 0, kFailure = 1, kCheckFailed = 2, kDegenerate = 3, kNewton = 4, kHypothesis = 5, kBadInput = 6 };

struct Options {
  std::string model, params, config, section, out;
  std::string x0, y0;
  std::size_t samples = 100, points = 100, pairs = 1000;
  double tol = -1.0;  // negative: command default
  double h = 1e-3, T = -1.0;
  std::uint64_t seed = 42;
  std::string method = "rk4";
};

inline ojson vec_json(const Vector& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// "0.1,0.2" or "[0.1, 0.2]"; the empty string is the empty vector.
inline Vector parse_vector(const std::string& s, const char* what) {
  std::vector<double> vals;
  auto bad = [&] { return ConfigError(std::string(what) + ": expected a comma-separated list of numbers"); };
  if (!s.empty() && s.front() == '[') {
    const auto j = ojson::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw bad();
    for (const auto& e : j) {
      if (!e.is_number()) throw bad();
      vals.push_back(e.get<double>());
    }
  } else if (!s.empty()) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      try {
        vals.push_back(std::stod(item, &used));
      } catch (const std::exception&) {
        throw bad();
      }
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw bad();
    }
  }
  return Eigen::Map<Vector>(vals.data(), vals.size());
}

inline ModelBundle load_model(const Options& o) {
  if (!o.config.empty()) {
    if (!o.model.empty()) throw ConfigError("give either --model or --config, not both");
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config file '" + o.config + "'");
    const auto j = ojson::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file '" + o.config + "' is not valid JSON");
    return model_from_config(config_from_json(j));
  }
  if (o.model.empty()) throw ConfigError("one of --model or --config is required");
  ojson params = ojson::object();
  if (!o.params.empty()) {
    params = ojson::parse(o.params, nullptr, false);
    if (params.is_discarded()) throw BadParams("--params is not valid JSON");
  }
  return get_model(o.model, params);
}

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Structure-equation and subbundle-rank verdicts on seeded base points.
inline ojson validation_block(const ModelBundle& b, const std::vector<BasePoint>& pts, double tol, bool& pass) {
  const auto rep = validate_structure(b.algebroid(), pts, tol);
  std::size_t rank_failures = 0;
  double ann_residual = 0.0;
  for (const auto& x : pts) {
    try {
      const auto f = frame(b.system().constraint(), x.x);
      if (f.complement.cols() > 0 && f.span.cols() > 0)
        ann_residual = std::max(ann_residual, (f.span.transpose() * f.complement).cwiseAbs().maxCoeff());
    } catch (const RankDeficient&) {
      ++rank_failures;
    }
  }
  pass = rep.pass && rank_failures == 0 && ann_residual <= tol;
  ojson worst = ojson::array();
  for (double v : rep.worst_point) worst.push_back(v);
  return {{"max_residual_eq1", rep.max_residual_eq1},
          {"max_residual_eq2", rep.max_residual_eq2},
          {"structure_pass", rep.pass},
          {"worst_point", worst},
          {"subbundle_rank_failures", rank_failures},
          {"annihilator_residual", ann_residual},
          {"pass", pass}};
}

inline std::vector<BasePoint> sample_points(const ModelBundle& b, SplitMix64& rng, std::size_t count) {
  std::vector<BasePoint> pts;
  for (std::size_t i = 0; i < count; ++i) pts.push_back(b.sample_base(rng));
  return pts;
}

inline int cmd_list(ojson& rep) {
  ojson arr = ojson::array();
  for (const auto& n : model_names()) {
    const auto b = get_model(n);
    ojson sections = ojson::array();
    for (const auto& s : b.config.hj_sections) sections.push_back(s.name);
    arr.push_back({{"name", n},
                   {"m", b.config.m},
                   {"n", b.config.n},
                   {"r", b.config.r},
                   {"regular", b.regular},
                   {"oracle", static_cast<bool>(b.oracle)},
                   {"hj_sections", sections},
                   {"doc", b.doc}});
  }
  rep["models"] = arr;
  return kPass;
}

inline int cmd_validate(const Options& o, ojson& rep) {
  const auto b = load_model(o);
  const double tol = o.tol >= 0 ? o.tol : 1e-10;
  if (o.samples == 0) throw BadParams("--samples must be positive");
  SplitMix64 rng(o.seed);
  const auto pts = sample_points(b, rng, o.samples);
  bool pass = false;
  rep["model"] = b.name;
  rep["samples"] = o.samples;
  rep["tol"] = tol;
  rep["validation"] = validation_block(b, pts, tol, pass);
  return pass ? kPass : kCheckFailed;
}

inline int cmd_simulate(const Options& o, ojson& rep) {
  const auto b = load_model(o);
  const auto& sys = b.system();
  const Vector x0 = o.x0.empty() ? b.x0() : parse_vector(o.x0, "--x0");
  const Vector y0 = o.y0.empty() ? b.y0() : parse_vector(o.y0, "--y0");
  if (x0.size() != sys.m()) throw BadParams("--x0 must have m entries");
  const double T = o.T >= 0 ? o.T : 10.0;
  Method method;
  if (o.method == "rk4")
    method = Method::rk4;
  else if (o.method == "implicit_midpoint")
    method = Method::implicit_midpoint;
  else
    throw BadParams("--method must be rk4 or implicit_midpoint");
  rep["model"] = b.name;
  rep["method"] = o.method;
  rep["h"] = o.h;
  rep["T"] = T;
  rep["x0"] = vec_json(x0);
  rep["y0"] = vec_json(y0);

  const Vector a0 = coordinates_in_U(sys, x0, y0);
  const auto traj = integrate(sys, x0, a0, o.h, T, method);
  const auto drift = energy_drift(sys, traj);
  const int order = method == Method::rk4 ? 4 : 2;
  const auto check = trajectory_residuals(sys, traj, order, 0.0);
  const double scale = 1.0 + state_scale(traj);
  const double res_tol = 50.0 * std::pow(o.h, order) * scale;
  const auto& w = check.worst;
  const bool pass = w.r_U <= res_tol && w.r_kin <= res_tol && w.r_leg <= res_tol && w.r_mom <= res_tol;

  rep["steps"] = traj.states.size() - 1;
  rep["energy"] = {{"E0", drift.E0}, {"max_abs_drift", drift.max_abs_drift}};
  rep["residuals"] = {{"fd_order", order},   {"tol", res_tol},        {"max_r_U", w.r_U}, {"max_r_kin", w.r_kin},
                      {"max_r_leg", w.r_leg}, {"max_r_mom", w.r_mom}, {"pass", pass}};
  const auto& last = traj.states.back();
  rep["final_state"] = {{"t", traj.times.back()}, {"x", vec_json(last.x)}, {"y", vec_json(last.y)}, {"p", vec_json(last.p)}};

  if (!o.out.empty()) {
    std::ostringstream csv;
    csv << "t";
    for (int i = 1; i <= sys.m(); ++i) csv << ",x" << i;
    for (int a = 1; a <= sys.n(); ++a) csv << ",y" << a;
    for (int a = 1; a <= sys.n(); ++a) csv << ",p" << a;
    csv << ",E_L,res_kin,res_mom\n";
    const auto E = energy_series(sys, traj);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const auto& s = traj.states[k];
      csv << csv_number(traj.times[k]);
      for (int i = 0; i < s.x.size(); ++i) csv << ',' << csv_number(s.x[i]);
      for (int a = 0; a < s.y.size(); ++a) csv << ',' << csv_number(s.y[a]);
      for (int a = 0; a < s.p.size(); ++a) csv << ',' << csv_number(s.p[a]);
      csv << ',' << csv_number(E[k]) << ',' << csv_number(check.nodes[k].r_kin) << ','
          << csv_number(check.nodes[k].r_mom) << '\n';
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + o.out + "'");
    f << csv.str();
    rep["csv"] = o.out;
  }
  return pass ? kPass : kCheckFailed;
}

inline DualPoint sample_dual(const ModelBundle& b, SplitMix64& rng) {
  const auto x = b.sample_base(rng);
  Vector p(b.config.n);
  for (int a = 0; a < p.size(); ++a) p[a] = rng.uniform(-2.0, 2.0);
  return {x.x, p};
}

/// Random pair at pt: a combination of generators (a member), the same
/// with one coordinate shifted, or entirely random coordinates.
inline DiracPair random_pair(const DiracBasis& basis, SplitMix64& rng) {
  const auto& g = basis.generators;
  const int n = static_cast<int>(basis.base.p.size());
  const int kind = rng.integer(0, 2);
  DiracPair out{{basis.base, Vector::Zero(n), Vector::Zero(n)}, {basis.base, Vector::Zero(n), Vector::Zero(n)}};
  auto rand_vec = [&] {
    Vector v(n);
    for (int a = 0; a < n; ++a) v[a] = rng.uniform(-1.0, 1.0);
    return v;
  };
  if (kind == 2) {
    out.X.z = rand_vec();
    out.X.u = rand_vec();
    out.alpha.r = rand_vec();
    out.alpha.v = rand_vec();
    return out;
  }
  for (const auto& gen : g) {
    const double c = rng.uniform(-1.0, 1.0);
    out.X.z += c * gen.X.z;
    out.X.u += c * gen.X.u;
    out.alpha.r += c * gen.alpha.r;
    out.alpha.v += c * gen.alpha.v;
  }
  if (kind == 1) {
    const int slot = rng.integer(0, 4 * n - 1);
    Vector* parts[4] = {&out.X.z, &out.X.u, &out.alpha.r, &out.alpha.v};
    (*parts[slot / n])[slot % n] += rng.uniform(0.0, 1.0) < 0.5 ? -1e-3 : 1e-3;
  }
  return out;
}

inline int cmd_dirac(const Options& o, ojson& rep) {
  const auto b = load_model(o);
  const auto& sys = b.system();
  const double tol = o.tol >= 0 ? o.tol : 1e-10;
  SplitMix64 rng(o.seed);
  SplitMix64 pair_rng = rng.split();
  const int n = sys.n();
  std::vector<DualPoint> pts;
  for (std::size_t i = 0; i < o.points; ++i) pts.push_back(sample_dual(b, rng));

  int min_rank = 2 * n;
  double max_self = 0.0;
  std::vector<DiracBasis> bases;
  for (const auto& pt : pts) {
    bases.push_back(dirac_generators(b.algebroid(), sys.constraint(), pt));
    min_rank = std::min(min_rank, generator_rank(bases.back()));
    max_self = std::max(max_self, check_self_orthogonal(bases.back()));
  }
  const bool gen_pass = min_rank == 2 * n && max_self <= tol;
  rep["model"] = b.name;
  rep["points"] = o.points;
  rep["generators"] = {{"expected_rank", 2 * n}, {"min_rank", pts.empty() ? 0 : min_rank},
                       {"max_self_orthogonality", max_self}, {"pass", gen_pass}};

  bool agree_pass = true;
  if (o.pairs > 0) {
    if (bases.empty()) throw BadParams("--pairs needs at least one point");
    std::size_t agree = 0, members = 0;
    for (std::size_t k = 0; k < o.pairs; ++k) {
      const auto& basis = bases[k % bases.size()];
      const auto pair = random_pair(basis, pair_rng);
      const bool s = dirac_member_symplectic(b.algebroid(), sys.constraint(), pair).member;
      const bool p = dirac_member_poisson(b.algebroid(), sys.constraint(), pair);
      agree += s == p;
      members += s;
    }
    agree_pass = agree == o.pairs;
    rep["agreement"] = {{"pairs", o.pairs}, {"agree", agree}, {"members", members}, {"pass", agree_pass}};
  }

  std::vector<BasePoint> base;
  for (const auto& pt : pts) base.push_back({pt.x});
  if (!base.empty()) {
    bool vpass = false;
    rep["validation"] = validation_block(b, base, 1e-10, vpass);
  }
  return gen_pass && agree_pass ? kPass : kCheckFailed;
}

inline int cmd_hj(const Options& o, ojson& rep) {
  const auto b = load_model(o);
  const auto& sys = b.system();
  if (b.built.sections.empty()) throw BadParams("model '" + b.name + "' has no HJ sections");
  const std::string name = o.section.empty() ? b.built.sections.front().first : o.section;
  const auto& section = b.section(name);
  const Vector x0 = o.x0.empty() ? b.x0() : parse_vector(o.x0, "--x0");
  if (x0.size() != sys.m()) throw BadParams("--x0 must have m entries");
  const double tol = o.tol >= 0 ? o.tol : 1e-8;
  const double T = o.T >= 0 ? o.T : 1.0;
  rep["model"] = b.name;
  rep["section"] = name;
  rep["x0"] = vec_json(x0);
  rep["h"] = o.h;
  rep["T"] = T;
  rep["tol"] = tol;

  const CompiledSection cs(sys, section);
  const auto k = check_in_K(sys, cs, {x0}, tol);
  rep["at_x0"] = {{"in_U", k.in_U},
                  {"legendre_gap", k.legendre_gap},
                  {"closedness", check_closedness(sys, cs, {x0})},
                  {"hj_residual", vec_json(hj_residual(sys, cs, {x0}))}};
  const auto v = verify_theorem(sys, section, {x0}, o.h, T, tol);
  rep["theorem"] = {{"nodes", v.nodes},
                    {"max_legendre_gap", v.max_legendre_gap},
                    {"max_closedness", v.max_closedness},
                    {"max_hj_residual", v.max_hj},
                    {"max_lift_residual", v.max_lift},
                    {"lift_tol", v.lift_tol},
                    {"hj_pass", v.hj_pass},
                    {"lift_pass", v.lift_pass},
                    {"consistent", v.consistent}};
  return v.hj_pass && v.lift_pass && v.consistent ? kPass : kCheckFailed;
}

inline int cmd_export(const Options& o, ojson& rep) {
  rep["config"] = config_to_json(load_model(o).config);
  return kPass;
}

inline void error_report(ojson& rep, const char* type, const std::string& message) {
  rep["error"] = {{"type", type}, {"message", message}};
}

/// Runs one command. The JSON report goes to `out`, diagnostics and wall
/// time to `err`. Everything written to `out` is a function of the
/// arguments alone.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Implicit Lagrangian systems on Lie algebroids", "algmech"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Options o;

  auto model_flags = [&](CLI::App* c) {
    c->add_option("--model", o.model, "built-in model name");
    c->add_option("--params", o.params, "model parameters as a JSON object");
    c->add_option("--config", o.config, "model config file (JSON)");
    c->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  };
  auto* list = app.add_subcommand("list-models", "list built-in models");
  auto* validate = app.add_subcommand("validate", "check the structure equations and the subbundle rank");
  model_flags(validate);
  validate->add_option("--samples", o.samples, "number of sample points")->capture_default_str();
  validate->add_option("--tol", o.tol, "residual tolerance (default 1e-10)");
  auto* simulate = app.add_subcommand("simulate", "integrate the implicit Lagrangian system");
  model_flags(simulate);
  simulate->add_option("--x0", o.x0, "initial base point, comma-separated");
  simulate->add_option("--y0", o.y0, "initial fiber point (n entries, must lie in U)");
  simulate->add_option("--h", o.h, "step size")->capture_default_str();
  simulate->add_option("--T", o.T, "horizon (default 10)");
  simulate->add_option("--method", o.method, "rk4 or implicit_midpoint")->capture_default_str();
  simulate->add_option("--out", o.out, "trajectory CSV path");
  auto* dirac = app.add_subcommand("dirac-check", "certify the induced Dirac structure");
  model_flags(dirac);
  dirac->add_option("--points", o.points, "number of sample points")->capture_default_str();
  dirac->add_option("--pairs", o.pairs, "number of random membership pairs")->capture_default_str();
  dirac->add_option("--tol", o.tol, "self-orthogonality tolerance (default 1e-10)");
  auto* hj = app.add_subcommand("hj-check", "verify a Hamilton-Jacobi section");
  model_flags(hj);
  hj->add_option("--section", o.section, "section name (default: the first)");
  hj->add_option("--x0", o.x0, "start of the base flow");
  hj->add_option("--h", o.h, "step size")->capture_default_str();
  hj->add_option("--T", o.T, "horizon (default 1)");
  hj->add_option("--tol", o.tol, "HJ residual tolerance (default 1e-8)");
  auto* exp = app.add_subcommand("export", "print a model as a config file");
  model_flags(exp);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kBadInput;
  }

  ojson rep;
  CLI::App* cmd = app.get_subcommands().front();
  rep["command"] = cmd->get_name();
  int code = kFailure;
  try {
    if (cmd == list) code = cmd_list(rep);
    if (cmd == validate) code = cmd_validate(o, rep);
    if (cmd == simulate) code = cmd_simulate(o, rep);
    if (cmd == dirac) code = cmd_dirac(o, rep);
    if (cmd == hj) code = cmd_hj(o, rep);
    if (cmd == exp) code = cmd_export(o, rep);
  } catch (const Degenerate& e) {
    error_report(rep, "Degenerate", e.what());
    code = kDegenerate;
  } catch (const NewtonDivergence& e) {
    error_report(rep, "NewtonDivergence", e.what());
    code = kNewton;
  } catch (const HypothesisViolated& e) {
    error_report(rep, "HypothesisViolated", e.what());
    rep["error"]["condition"] = e.condition();
    rep["error"]["point"] = e.point();
    code = kHypothesis;
  } catch (const ParseError& e) {
    error_report(rep, "ParseError", e.what());
    code = kBadInput;
  } catch (const ConfigError& e) {
    error_report(rep, "ConfigError", e.what());
    code = kBadInput;
  } catch (const UnknownModel& e) {
    error_report(rep, "UnknownModel", e.what());
    code = kBadInput;
  } catch (const BadParams& e) {
    error_report(rep, "BadParams", e.what());
    code = kBadInput;
  } catch (const Error& e) {
    error_report(rep, "Error", e.what());
    code = kFailure;
  }
  rep["exit_code"] = code;
  if (cmd == exp && code == kPass)
    out << rep["config"].dump(2) << '\n';
  else
    out << rep.dump(2) << '\n';
  if (rep.contains("error")) err << "error: " << rep["error"]["message"].get<std::string>() << '\n';
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "wall_time_s: " << elapsed << '\n';
  return code;
}

}  // namespace algmech::cli
