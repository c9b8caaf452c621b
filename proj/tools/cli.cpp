#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracvar/fracops.hpp"
#include "fracvar/report.hpp"
#include "fracvar/residuals.hpp"
#include "fracvar/solver.hpp"

namespace fracvar::cli {

namespace fs = std::filesystem;

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error("CSV has no column '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

fs::path prepare_dir(const std::string& dir) {
  if (dir.empty()) throw std::runtime_error("--out is required");
  fs::create_directories(dir);
  return fs::path(dir);
}

struct Loaded {
  ProblemConfig config;
  VariationalProblem problem;
  SolverOptions options;
};

Loaded load(const RunConfig& cfg, const std::map<std::string, std::string>& solver_overrides) {
  if (cfg.problem_path.empty()) throw std::runtime_error("--problem is required");
  ProblemConfig config = ProblemConfig::parse(read_file(cfg.problem_path));
  VariationalProblem p = build_problem(config);
  std::map<std::string, std::string> overrides = solver_overrides;
  if (cfg.threads && !overrides.count("threads") && !overrides.count("solver.threads")) {
    overrides["threads"] = std::to_string(*cfg.threads);
  }
  SolverOptions opts = solver_options_from(config, overrides);
  return {std::move(config), std::move(p), opts};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs body and maps exceptions to exit status 1 with file/line context.
template <typename Body>
int guarded(const RunConfig& cfg, std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ProblemError& e) {
    err << "error: " << cfg.problem_path << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kError;
}

}  // namespace

Table read_csv(const std::string& path) {
  std::stringstream in(read_file(path));
  std::string line;
  Table t;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = cells;
      t.columns.resize(cells.size());
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || *end != '\0' || !std::isfinite(v)) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
      }
      t.columns[i].push_back(v);
    }
  }
  if (t.header.empty()) throw std::runtime_error(path + ": empty CSV");
  return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += "\n";
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) text += (c ? "," : "") + fmt(columns[c][r]);
    text += "\n";
  }
  write_file(path, text);
}

int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(cfg, err, [&] {
    const Loaded L = load(cfg, cfg.overrides);
    const fs::path dir = prepare_dir(cfg.output_dir);
    const SolverReport rep = solve(L.problem, L.options);

    const auto& x = rep.trajectory;
    write_csv((dir / "trajectory.csv").string(), {"t", "x", "caputo_dx"},
              {x.grid().nodes(), std::vector<double>(x.values().begin(), x.values().end()),
               std::vector<double>(x.caputo().begin(), x.caputo().end())});
    write_file(dir / "report.json", dump(to_json(L.problem, L.options, rep)));

    out << "T_star = " << fmt(rep.T_star) << "\n";
    out << "objective = " << fmt(rep.objective) << "\n";
    out << "converged = " << (rep.converged ? "true" : "false") << "\n";
    for (const auto& n : rep.notes) out << "note: " << n << "\n";
    return rep.converged ? kOk : kNotConverged;
  });
}

namespace {

// Candidate CSV resampled onto the solver grid over [t0, tN].
SampledTrajectory load_candidate(const std::string& path, const VariationalProblem& p, const SolverOptions& opts) {
  const Table t = read_csv(path);
  const auto& ts = t.columns[t.column("t")];
  const auto& xs = t.columns[t.column("x")];
  if (ts.size() < 5) throw std::runtime_error("candidate needs at least 5 rows, got " + std::to_string(ts.size()));
  const double t0 = ts.front();
  const double tN = ts.back();
  if (!(tN > t0)) throw std::runtime_error("candidate t must increase");
  const double h = (tN - t0) / static_cast<double>(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (std::fabs((ts[i] - ts[i - 1]) - h) > 1e-6 * h) {
      throw std::runtime_error("candidate t grid is not uniform at row " + std::to_string(i + 1));
    }
  }
  if (std::fabs(t0 - p.a()) > 1e-12 * std::max(1.0, std::fabs(p.a()))) {
    throw std::runtime_error("candidate must start at t = a");
  }
  if (std::fabs(xs.front() - p.x_a()) > 1e-12 * std::max(1.0, std::fabs(p.x_a()))) {
    throw std::runtime_error("candidate must start at x = x_a");
  }
  const UniformGrid grid(p.a(), tN, opts.n_nodes);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double pos = (grid.node(i) - t0) / h;
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(pos))), ts.size() - 2);
    const double w = std::clamp(pos - static_cast<double>(j), 0.0, 1.0);
    v[i] = w == 0.0 ? xs[j] : (1.0 - w) * xs[j] + w * xs[j + 1];
  }
  v.front() = p.x_a();
  v.back() = xs.back();
  return SampledTrajectory(grid, std::move(v), p.order(), opts.threads);
}

// Distance of the candidate's endpoint from the terminal condition.
double endpoint_violation(const VariationalProblem& p, double T, double xT) {
  return std::visit(
      [&](const auto& tc) -> double {
        using K = std::decay_t<decltype(tc)>;
        if constexpr (std::is_same_v<K, VerticalLine>) return std::fabs(T - tc.T_fixed);
        if constexpr (std::is_same_v<K, HorizontalLine>) return std::fabs(xT - tc.xT_fixed);
        if constexpr (std::is_same_v<K, TerminalCurve> || std::is_same_v<K, CurveConstrained>) {
          return std::fabs(xT - p.curve(T));
        }
        if constexpr (std::is_same_v<K, TruncatedVertical>) {
          return std::fabs(T - tc.T_fixed) + std::max(0.0, tc.x_min - xT);
        }
        if constexpr (std::is_same_v<K, TruncatedHorizontal>) {
          return std::fabs(xT - tc.xT_fixed) + std::max(0.0, T - tc.T_max);
        }
        return 0.0;
      },
      p.terminal());
}

}  // namespace

int run_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(cfg, err, [&] {
    std::map<std::string, std::string> solver_overrides = cfg.overrides;
    double tol = 1e-2;
    if (auto it = solver_overrides.find("tol"); it != solver_overrides.end()) {
      char* end = nullptr;
      tol = std::strtod(it->second.c_str(), &end);
      if (*end != '\0' || !(tol > 0.0)) throw std::runtime_error("tol must be a positive number");
      solver_overrides.erase(it);
    }
    const Loaded L = load(cfg, solver_overrides);
    if (cfg.candidate_path.empty()) throw std::runtime_error("--candidate is required");
    const SampledTrajectory x = load_candidate(cfg.candidate_path, L.problem, L.options);
    const double T = x.T();
    if (!std::holds_alternative<InfiniteHorizon>(L.problem.terminal()) && T > L.problem.b()) {
      throw std::runtime_error("candidate ends after b");
    }

    const ElResidual el = el_residual(L.problem, x, T);
    const TransversalityReport tr = transversality(L.problem, x, T);
    const double violation = endpoint_violation(L.problem, T, x.terminal_value());

    bool ok = true;
    auto line = [&](const std::string& name, double v) {
      const bool pass = std::fabs(v) < tol;
      ok = ok && pass;
      out << name << " = " << fmt(v) << (pass ? "" : "  (above tolerance)") << "\n";
    };
    out << "T = " << fmt(T) << "\n";
    out << "case = " << case_tag_name(tr.case_tag) << "\n";
    line("el_interior_sup", el.interior_sup);
    if (tr.R1) line("R1", *tr.R1);
    if (tr.R2) line("R2", *tr.R2);
    if (tr.complementarity) line("complementarity", *tr.complementarity);
    line("endpoint_violation", violation);
    if (tr.kkt_sign_ok) {
      out << "kkt_sign_ok = " << (*tr.kkt_sign_ok ? "true" : "false") << "\n";
      ok = ok && *tr.kkt_sign_ok;
    }
    out << "tolerance = " << fmt(tol) << "\n";
    out << "result = " << (ok ? "pass" : "fail") << "\n";

    if (!cfg.output_dir.empty()) {
      const fs::path dir = prepare_dir(cfg.output_dir);
      Json j;
      j["T"] = T;
      j["el_interior_sup"] = el.interior_sup;
      j["el_flagged_nodes"] = el.flagged;
      j["endpoint_violation"] = violation;
      j["residuals"] = to_json(tr);
      j["tolerance"] = tol;
      j["pass"] = ok;
      write_file(dir / "check.json", dump(j));
    }
    return ok ? kOk : kNotConverged;
  });
}

int run_ops(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(cfg, err, [&] {
    if (cfg.candidate_path.empty()) throw std::runtime_error("--candidate (input CSV) is required");
    if (!cfg.alpha) throw std::runtime_error("--alpha is required");
    const Table t = read_csv(cfg.candidate_path);
    if (t.header.size() < 2) throw std::runtime_error("input CSV needs a t column and a value column");
    const auto& ts = t.columns[t.column("t")];
    const std::size_t value_col = t.column("t") == 0 ? 1 : 0;
    if (ts.size() < 3) throw std::runtime_error("input needs at least 3 rows");
    const UniformGrid grid(ts.front(), ts.back(), ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (std::fabs(ts[i] - grid.node(i)) > 1e-6 * grid.step()) throw std::runtime_error("input t grid is not uniform");
    }
    const SampledFunction f(grid, t.columns[value_col]);
    const unsigned threads = cfg.threads.value_or(0);
    const double alpha = *cfg.alpha;
    const std::string& op = cfg.operator_name;

    std::optional<SampledFunction> result;
    if (op == "left_caputo") {
      result = left_caputo(f, FractionalOrder(alpha), threads);
    } else if (op == "left_rl_integral") {
      result = left_rl_integral(f, alpha, threads);
    } else if (op == "right_rl_integral") {
      result = right_rl_integral(f, alpha, threads);
    } else if (op == "right_rl_derivative") {
      result = right_rl_derivative(f, FractionalOrder(alpha), threads);
    } else {
      throw std::runtime_error("unknown operator '" + op +
                               "' (left_caputo, left_rl_integral, right_rl_integral, right_rl_derivative)");
    }
    const fs::path dir = prepare_dir(cfg.output_dir);
    write_csv((dir / "ops.csv").string(), {"t", op},
              {grid.nodes(), std::vector<double>(result->values().begin(), result->values().end())});
    out << "wrote " << (dir / "ops.csv").string() << " (" << grid.size() << " rows)\n";
    return kOk;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fracvar: fractional variational problems with variable endpoints"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::vector<std::string> sets;
  double alpha = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem_path, "problem file");
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--set", sets, "override key=value (repeatable)");
  };
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a problem file");
  add_common(solve_cmd);
  CLI::App* check_cmd = app.add_subcommand("check", "check a candidate trajectory");
  add_common(check_cmd);
  check_cmd->add_option("--candidate", cfg.candidate_path, "candidate CSV with t, x columns");
  CLI::App* ops_cmd = app.add_subcommand("ops", "apply a fractional operator to a sampled CSV");
  ops_cmd->add_option("--candidate", cfg.candidate_path, "input CSV with t and one value column");
  ops_cmd->add_option("--out", cfg.output_dir, "output directory");
  ops_cmd->add_option("--operator", cfg.operator_name, "operator name")->required();
  auto* alpha_opt = ops_cmd->add_option("--alpha", alpha, "order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  if (alpha_opt->count()) cfg.alpha = alpha;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      err << "error: --set expects key=value, got '" << s << "'\n";
      return kError;
    }
    cfg.overrides[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  if (const char* env = std::getenv("FRACVAR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*env == '\0' || *end != '\0' || v < 0 || v > 1024) {
      err << "error: FRACVAR_THREADS must be an integer in [0, 1024]\n";
      return kError;
    }
    cfg.threads = static_cast<unsigned>(v);
  }

  if (solve_cmd->parsed()) {
    cfg.command = "solve";
    return run_solve(cfg, out, err);
  }
  if (check_cmd->parsed()) {
    cfg.command = "check";
    return run_check(cfg, out, err);
  }
  cfg.command = "ops";
  return run_ops(cfg, out, err);
}

}  // namespace fracvar::cli
