#include "fraclap/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fraclap/error.hpp"
#include "fraclap/extension.hpp"
#include "fraclap/fractional.hpp"
#include "fraclap/greens.hpp"
#include "fraclap/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fraclap {

namespace {
constexpr const char* kVersion = "0.3.0";
}

SpectralBasis make_basis(const DomainSpec& d, const BasisOptions& opts) {
  auto box = [&](int dim) {
    if (d.nodes < 1) throw ConfigError("nodes must be positive");
    std::vector<Interval> b(dim, Interval{-1.0, 1.0});
    return build_box_basis(b, 2.0 / (d.nodes + 1), opts);
  };
  if (d.name == "interval") return box(1);
  if (d.name == "square") return box(2);
  if (d.name == "cube") return box(3);
  if (d.name == "dumbbell") return build_masked_basis(dumbbell_mask(d.k, d.lobe, d.neck, d.h), opts);
  if (d.name.rfind("mask:", 0) == 0) return build_masked_basis(read_mask_file(d.name.substr(5)), opts);
  throw ConfigError("unknown domain '" + d.name + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("malformed number '" + item + "' in list '" + text + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError("malformed number '" + item + "' in list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty() || (!text.empty() && text.back() == ',')) throw ConfigError("malformed list '" + text + "'");
  return out;
}

Point parse_point(const std::string& text, int dim) {
  const auto v = parse_list(text);
  if (int(v.size()) != dim) throw ConfigError("point '" + text + "' needs " + std::to_string(dim) + " components");
  Point p{0, 0, 0};
  for (int d = 0; d < dim; ++d) p[d] = v[d];
  return p;
}

namespace {
json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json point(const Point& p, int n) { return std::vector<double>(p.begin(), p.begin() + n); }
}  // namespace

json to_json(const ConstantSet& k) {
  return json{{"n", k.n},
              {"s", k.s},
              {"p", k.p},
              {"S", k.S},
              {"C_s", k.Cs},
              {"a", k.a},
              {"c", k.c},
              {"b", k.b},
              {"c0", k.c0},
              {"c1", k.c1},
              {"c2", opt(k.c2)},
              {"c2_literal", opt(k.c2_literal)},
              {"D", k.D},
              {"E", k.E},
              {"d_literal", opt(k.d_literal)},
              {"d_corrected", opt(k.d_corrected)},
              {"d_amplitude", opt(k.d_amplitude)},
              {"g_literal", k.g_literal},
              {"g_corrected", k.g_corrected},
              {"note", k.note}};
}

json to_json(const SolveReport& r, bool with_field) {
  const int n = int(r.x_eps.size());
  json j{{"kind", to_string(r.kind)},
         {"epsilon", r.epsilon},
         {"s", r.s},
         {"energy", r.energy},
         {"residual", r.residual},
         {"u_max", r.u.size() ? r.u.maxCoeff() : 0.0},
         {"mu_eps", r.mu_eps},
         {"x_eps", point(r.x_eps, n)},
         {"x_node", r.x_node},
         {"bound_ratio", r.bound_ratio},
         {"core_width", r.core_width},
         {"cells_per_core", r.cells_per_core},
         {"resolved", r.resolved},
         {"stage1_iterations", r.stage1_iterations},
         {"newton_iterations", r.newton_iterations},
         {"krylov_iterations", r.krylov_iterations}};
  if (with_field) j["u"] = std::vector<double>(r.u.data(), r.u.data() + r.u.size());
  return j;
}

json to_json(const ReducedConfig& c, int dim) {
  json sig = json::array();
  for (const Point& p : c.sigmas) sig.push_back(point(p, dim));
  return json{{"k", c.k}, {"lambdas", c.lambdas}, {"sigmas", sig}, {"delta0", c.delta0}, {"alpha0", c.alpha0}};
}

json to_json(const RateFit& f) {
  return json{{"limit", f.limit},     {"used_eps", f.used_eps}, {"cauchy", f.cauchy},
              {"targets", f.targets}, {"ratios", f.ratios},     {"within", f.within}};
}

void write_sweep_csv(std::ostream& out, const SweepTable& t) {
  out << "epsilon,mu_eps";
  for (int d = 0; d < t.n; ++d) out << ",x_eps_" << d;
  out << ",x_cells,rate_critical,rate_subcritical,green_residual,bound_ratio,b_dev,energy,residual,"
         "cells_per_core,grid_size,newton_iterations,continuation_steps,converged,resolved\n";
  out << std::setprecision(17);
  for (const auto& r : t.rows) {
    out << r.epsilon << ',' << r.mu_eps;
    for (int d = 0; d < t.n; ++d) out << ',' << r.x_eps[d];
    out << ',' << r.x_cells << ',' << r.rate_critical << ',' << r.rate_subcritical << ',' << r.green_residual << ','
        << r.bound_ratio << ',' << r.b_dev << ',' << r.energy << ',' << r.residual << ',' << r.cells_per_core << ','
        << r.grid_size << ',' << r.newton_iterations << ',' << r.continuation_steps << ',' << int(r.converged) << ','
        << int(r.resolved) << '\n';
  }
}

void write_field_csv(std::ostream& out, const DomainGrid& g, const Vec& u, const std::string& name) {
  const char* axes[] = {"x", "y", "z"};
  for (int d = 0; d < g.dim(); ++d) out << axes[d] << ',';
  out << name << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.coord(i);
    for (int d = 0; d < g.dim(); ++d) out << x[d] << ',';
    out << u[i] << '\n';
  }
}

namespace {

class RunDir {
 public:
  RunDir(std::string path, std::string command, json inputs) : path_(std::move(path)) {
    manifest_ = json{{"tool", "fraclap"},
                     {"version", kVersion},
                     {"command", std::move(command)},
                     {"inputs", std::move(inputs)},
                     {"seed", nullptr},
                     {"outputs", json::array()}};
    fs::create_directories(path_);
  }
  std::ofstream open(const std::string& name) {
    manifest_["outputs"].push_back(name);
    std::ofstream f(fs::path(path_) / name);
    if (!f) throw ConfigError("cannot write " + name + " in " + path_);
    return f;
  }
  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
  void finish(const std::string& status, const json& error = nullptr) {
    manifest_["status"] = status;
    manifest_["error"] = error;
    std::ofstream f(fs::path(path_) / "manifest.json");
    f << manifest_.dump(2) << '\n';
  }
  json& manifest() { return manifest_; }

 private:
  std::string path_;
  json manifest_;
};

json tolerances(const SolveOptions& o) {
  return json{{"residual_tol", o.residual_tol}, {"polish_tol", o.polish_tol}, {"max_newton", o.max_newton},
              {"max_halvings", o.max_halvings}, {"gmres_tol", o.gmres_tol},   {"min_cells", o.min_cells}};
}

json domain_json(const DomainSpec& d) {
  json j{{"name", d.name}};
  if (d.name == "dumbbell")
    j.update(json{{"k", d.k}, {"lobe", d.lobe}, {"neck", d.neck}, {"h", d.h}});
  else if (d.name.rfind("mask:", 0) != 0)
    j["nodes"] = d.nodes;
  return j;
}

Backend parse_backend(const std::string& b) {
  if (b == "fast") return Backend::fast;
  if (b == "serial") return Backend::serial_reference;
  if (b == "parallel") return Backend::parallel_reference;
  throw ConfigError("unknown backend '" + b + "'");
}

Point domain_center(const DomainGrid& g) {
  Point c{0, 0, 0};
  for (int d = 0; d < g.dim(); ++d) c[d] = 0.5 * (g.bounds(d).lo + g.bounds(d).hi);
  return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral fractional Laplacian laboratory", "fraclap"};
  app.set_config("--config", "", "INI file with one section per subcommand; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  DomainSpec dom;
  std::string out_dir = "fraclap-run";
  double s = 0.5;
  std::string kind_text = "critical";
  SolveOptions sopt;

  auto add_domain = [&](CLI::App* c) {
    c->add_option("--domain", dom.name, "interval | square | cube | dumbbell | mask:PATH")->capture_default_str();
    c->add_option("--nodes", dom.nodes, "interior nodes per axis for boxes")->capture_default_str();
    c->add_option("--lobes", dom.k, "dumbbell lobes")->capture_default_str();
    c->add_option("--lobe", dom.lobe, "dumbbell lobe side")->capture_default_str();
    c->add_option("--neck", dom.neck, "dumbbell neck width")->capture_default_str();
    c->add_option("--mesh", dom.h, "dumbbell mesh size")->capture_default_str();
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--out", out_dir, "run directory")->capture_default_str();
    c->add_option("--s", s, "fractional order in (0, 1)")->capture_default_str();
  };

  // constants
  int cn = 1;
  auto* c_const = app.add_subcommand("constants", "closed-form constants for (n, s)");
  c_const->add_option("--n", cn, "dimension")->capture_default_str();
  add_common(c_const);

  // basis
  int modes = 10;
  std::string backend = "fast";
  auto* c_basis = app.add_subcommand("basis", "discrete Dirichlet eigenvalues");
  add_common(c_basis);
  add_domain(c_basis);
  c_basis->add_option("--modes", modes, "number of eigenvalues to write")->capture_default_str();
  c_basis->add_option("--backend", backend, "fast | serial | parallel")->capture_default_str();

  // solve
  double eps = 0.1;
  auto* c_solve = app.add_subcommand("solve", "least-energy solution");
  add_common(c_solve);
  add_domain(c_solve);
  c_solve->add_option("--kind", kind_text, "critical | subcritical")->capture_default_str();
  c_solve->add_option("--eps", eps, "epsilon")->capture_default_str();
  c_solve->add_option("--tol", sopt.residual_tol, "relative residual tolerance")->capture_default_str();

  // sweep
  std::string eps_list = "0.2,0.1,0.05";
  SweepOptions swopt;
  auto* c_sweep = app.add_subcommand("sweep", "epsilon sweep with rate extraction");
  add_common(c_sweep);
  add_domain(c_sweep);
  c_sweep->add_option("--kind", kind_text, "critical | subcritical")->capture_default_str();
  c_sweep->add_option("--eps", eps_list, "strictly decreasing comma separated list")->capture_default_str();
  bool verbose = false;
  c_sweep->add_flag("--verbose", verbose, "progress lines on stderr");
  c_sweep->add_option("--max-size", swopt.max_size, "largest grid used by refinement")->capture_default_str();
  c_sweep->add_option("--refine-cells", swopt.refine_cells, "refine below this many cells per core")
      ->capture_default_str();

  // reduce
  int rk = 1;
  std::string lambdas_text;
  std::vector<std::string> sigma_text;
  double delta0 = -1, alpha0 = -1;
  auto* c_reduce = app.add_subcommand("reduce", "critical points of the reduced energy");
  add_common(c_reduce);
  add_domain(c_reduce);
  c_reduce->add_option("--k", rk, "number of peaks")->capture_default_str();
  c_reduce->add_option("--kind", kind_text, "critical | subcritical")->capture_default_str();
  c_reduce->add_option("--lambda", lambdas_text, "starting scales, comma separated");
  c_reduce->add_option("--sigma", sigma_text, "starting center, repeat per peak (x,y)");
  c_reduce->add_option("--delta0", delta0, "admissibility margin (default 0.1 diam)");
  c_reduce->add_option("--alpha0", alpha0, "scaling exponent (default by kind)");

  // green
  std::string method = "lattice";
  auto* c_green = app.add_subcommand("green", "Green and Robin functions");
  add_common(c_green);
  add_domain(c_green);
  c_green->add_option("--method", method, "lattice | extrapolate")->capture_default_str();

  // extension-check
  auto* c_ext = app.add_subcommand("extension-check", "extension flux and Bessel checks");
  add_common(c_ext);
  add_domain(c_ext);

  // dumbbell
  auto* c_dumb = app.add_subcommand("dumbbell", "write a dumbbell mask");
  c_dumb->add_option("--out", out_dir, "run directory")->capture_default_str();
  c_dumb->add_option("--lobes", dom.k, "lobes")->capture_default_str();
  c_dumb->add_option("--lobe", dom.lobe, "lobe side")->capture_default_str();
  c_dumb->add_option("--neck", dom.neck, "neck width")->capture_default_str();
  c_dumb->add_option("--mesh", dom.h, "mesh size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();

  // Everything that can be checked without numerics is checked before the run directory exists.
  std::vector<double> eps_values;
  ProblemKind kind = ProblemKind::critical;
  json inputs;
  try {
    kind = parse_kind(kind_text);
    if (name == "sweep") {
      eps_values = parse_list(eps_list);
      for (std::size_t i = 0; i < eps_values.size(); ++i)
        if (!(eps_values[i] > 0) || (i > 0 && !(eps_values[i] < eps_values[i - 1])))
          throw ConfigError("--eps must be positive and strictly decreasing");
    }
    if (name == "constants") {
      inputs = json{{"n", cn}, {"s", s}};
    } else if (name == "dumbbell") {
      inputs = json{{"lobes", dom.k}, {"lobe", dom.lobe}, {"neck", dom.neck}, {"h", dom.h}};
    } else {
      inputs = json{{"domain", domain_json(dom)}, {"s", s}};
      if (name == "basis") inputs.update(json{{"modes", modes}, {"backend", backend}}), parse_backend(backend);
      if (name == "solve") inputs.update(json{{"kind", kind_text}, {"eps", eps}});
      if (name == "sweep")
        inputs.update(json{{"kind", kind_text}, {"eps", eps_values}, {"max_size", swopt.max_size},
                           {"refine_cells", swopt.refine_cells}});
      if (name == "reduce")
        inputs.update(json{{"kind", kind_text}, {"k", rk}, {"lambda", lambdas_text}, {"sigma", sigma_text},
                           {"delta0", delta0}, {"alpha0", alpha0}});
      if (name == "green") {
        if (method != "lattice" && method != "extrapolate") throw ConfigError("unknown method '" + method + "'");
        inputs["method"] = method;
      }
    }
    if (!lambdas_text.empty()) parse_list(lambdas_text);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  RunDir run(out_dir, name, inputs);
  run.manifest()["tolerances"] = tolerances(sopt);
  try {
    json result;
    if (name == "constants") {
      result = to_json(closed_form_constants(cn, s));
      run.write_json("constants.json", result);
    } else if (name == "dumbbell") {
      Mask m = dumbbell_mask(dom.k, dom.lobe, dom.neck, dom.h);
      {
        auto f = run.open("mask.txt");
        write_mask(f, m);
      }
      std::size_t on = 0;
      for (auto b : m.on) on += b;
      result = json{{"rows", m.rows}, {"cols", m.cols}, {"h", m.h}, {"nodes", on}, {"connected", mask_connected(m)}};
      run.write_json("dumbbell.json", result);
    } else {
      BasisOptions bo;
      if (name == "basis") bo.backend = parse_backend(backend);
      const SpectralBasis basis = make_basis(dom, bo);
      const DomainGrid& g = basis.grid();
      const int n = g.dim();
      if (name == "basis") {
        const Vec& ev = basis.eigenvalues();
        const int m = std::min<int>(modes, int(ev.size()));
        auto f = run.open("eigenvalues.csv");
        f << "index,lambda\n" << std::setprecision(17);
        for (int i = 0; i < m; ++i) f << i + 1 << ',' << ev[i] << '\n';
        result = json{{"size", g.size()}, {"dim", n}, {"h", g.h(0)}, {"lambda_1", ev[0]}, {"backend", backend}};
        run.write_json("basis.json", result);
      } else if (name == "solve") {
        SolveReport r = solve_least_energy(basis, s, eps, kind, sopt);
        result = to_json(r);
        run.write_json("report.json", result);
        auto f = run.open("solution.csv");
        write_field_csv(f, g, r.u);
      } else if (name == "sweep") {
        swopt.solve = sopt;
        if (verbose) {
          swopt.log = [&err](const std::string& line) { err << line << std::endl; };
          swopt.solve.trace = swopt.log;
        }
        SweepTable t = epsilon_sweep(basis, s, kind, eps_values, swopt);
        {
          auto f = run.open("sweep.csv");
          write_sweep_csv(f, t);
        }
        const ConstantSet k = closed_form_constants(n, s);
        GreenOptions go;
        go.full_cap = 0;
        const GreenCache cache(basis, s, go);
        const long c = g.nearest_node(domain_center(g));
        const double tau = c >= 0 ? robin_function(cache, std::size_t(c)) : std::nan("");
        json meta{{"grid", domain_json(dom)}, {"n", n}, {"s", s}, {"kind", kind_text}, {"constants", to_json(k)},
                  {"tau_center", tau}};
        std::vector<double> targets;
        json variants = json::array();
        if (kind == ProblemKind::critical && k.d_literal) {
          targets = {*k.d_literal * tau, *k.d_corrected * tau};
          variants = {"d_literal", "d_corrected"};
          meta["informational_target_d_amplitude"] = *k.d_amplitude * tau;
        } else {
          targets = {k.g_literal * tau, k.g_corrected * tau};
          variants = {"g_literal", "g_corrected"};
        }
        meta["variants"] = variants;
        try {
          meta["fit"] = to_json(rate_fit(t, targets));
        } catch (const NumericalError& e) {
          meta["fit"] = json{{"error", e.what()}};
        }
        run.write_json("sweep.json", meta);
        result = meta;
      } else if (name == "reduce") {
        const ConstantSet k = closed_form_constants(n, s);
        const GreenCache cache(basis, s);
        ReducedConfig c;
        c.k = rk;
        c.delta0 = delta0 > 0 ? delta0 : default_delta0(g);
        c.alpha0 = alpha0 > 0 ? alpha0 : default_alpha0(n, s, kind);
        if (!sigma_text.empty()) {
          for (const auto& t : sigma_text) c.sigmas.push_back(parse_point(t, n));
        } else if (rk == 1) {
          c.sigmas.push_back(g.coord(std::size_t(g.nearest_node(domain_center(g)))));
        } else if (dom.name == "dumbbell" && rk == dom.k) {
          for (int i = 0; i < rk; ++i) c.sigmas.push_back(Point{(2 * i + 0.5) * dom.lobe + 0.5 * dom.h, 0.5 * dom.lobe + 0.5 * dom.h, 0});
        } else {
          throw ConfigError("reduce: give one --sigma per peak");
        }
        if (int(c.sigmas.size()) != rk) throw ConfigError("reduce: number of --sigma values differs from k");
        if (!lambdas_text.empty()) {
          c.lambdas = parse_list(lambdas_text);
        } else {
          for (const Point& p : c.sigmas) {
            double l = 1.0;
            if (kind == ProblemKind::critical && k.c2) l = lambda_star(k, robin_at(cache, p));
            c.lambdas.push_back(std::clamp(l, 1.01 * c.delta0, 0.99 / c.delta0));
          }
        }
        CriticalResult cr = find_critical_config(cache, k, c, kind);
        result = json{{"start", to_json(c, n)},
                      {"config", to_json(cr.config, n)},
                      {"value", cr.value},
                      {"grad_norm", cr.grad_norm},
                      {"scale", cr.scale},
                      {"iterations", cr.iterations},
                      {"hessian_eigenvalues",
                       std::vector<double>(cr.hessian_eigenvalues.data(),
                                           cr.hessian_eigenvalues.data() + cr.hessian_eigenvalues.size())}};
        run.write_json("reduce.json", result);
      } else if (name == "green") {
        GreenOptions go;
        go.method = method == "lattice" ? RobinMethod::lattice : RobinMethod::extrapolate;
        const GreenCache cache(basis, s, go);
        if (!cache.full()) throw ConfigError("green: grid too large for a full Green matrix");
        {
          auto f = run.open("robin.csv");
          const char* axes[] = {"x", "y", "z"};
          for (int d = 0; d < n; ++d) f << axes[d] << ',';
          f << "tau";
          for (int d = 0; d < n; ++d) f << ",dtau_d" << axes[d];
          f << '\n' << std::setprecision(17);
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(cache.tau()[i])) continue;
            const Point x = g.coord(i);
            for (int d = 0; d < n; ++d) f << x[d] << ',';
            f << cache.tau()[i];
            for (int d = 0; d < n; ++d) f << ',' << cache.grad_tau()(i, d);
            f << '\n';
          }
        }
        const Eigen::MatrixXd& G = cache.matrix();
        const long c = g.nearest_node(domain_center(g));
        double tmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < g.size(); ++i)
          if (std::isfinite(cache.tau()[i])) tmin = std::min(tmin, cache.tau()[i]);
        result = json{{"method", cache.method_name()},
                      {"size", g.size()},
                      {"symmetry_error", (G - G.transpose()).cwiseAbs().maxCoeff() / G.cwiseAbs().maxCoeff()},
                      {"min_G", G.minCoeff()},
                      {"tau_min", tmin},
                      {"tau_center", c >= 0 ? json(cache.tau()[c]) : json(nullptr)}};
        run.write_json("green.json", result);
      } else if (name == "extension-check") {
        // a smooth field: a few low modes with decaying weights
        Vec u = Vec::Zero(g.size());
        for (int j = 0; j < std::min<int>(4, int(g.size())); ++j) u += basis.eigenvector(j) / (j + 1.0);
        const FluxResidual fr = flux_residual(basis, u, s);
        const ConstantSet k = closed_form_constants(n, s);
        const double r = 1.7;
        const double khalf = std::sqrt(M_PI / (2 * r)) * std::exp(-r);
        result = json{{"flux_analytic", fr.analytic},
                      {"flux_numerical", fr.numerical},
                      {"k_half_error", std::abs(bessel_k(0.5, r) - khalf) / khalf},
                      {"mode_energy", mode_energy_integral(s)},
                      {"C_s", k.Cs}};
        run.write_json("extension.json", result);
      }
    }
    run.manifest()["result"] = result;
    run.finish("ok");
    out << result.dump(2) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    run.finish("failed", json{{"type", "config"}, {"message", e.what()}});
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    run.finish("failed", json{{"type", "numerical"}, {"message", e.what()}, {"residual", e.residual}});
    err << "numerical failure: " << e.what() << " (last residual " << e.residual << ")\n";
    return 1;
  } catch (const std::exception& e) {
    run.finish("failed", json{{"type", "internal"}, {"message", e.what()}});
    err << "failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fraclap
