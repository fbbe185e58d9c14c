#include "gridmc/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "gridmc/generators.hpp"
#include "gridmc/parser.hpp"
#include "gridmc/parser_detail.hpp"
#include "gridmc/properties.hpp"
#include "gridmc/simulator.hpp"

namespace gridmc {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

struct SweepSpec {
  std::string name;
  double start, step, end;
};

SweepSpec parse_sweep(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos) throw std::runtime_error("sweep must be NAME=start:step:end");
  SweepSpec s;
  s.name = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  auto c1 = rest.find(':');
  auto c2 = rest.find(':', c1 == std::string::npos ? std::string::npos : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::runtime_error("sweep must be NAME=start:step:end");
  s.start = std::stod(rest.substr(0, c1));
  s.step = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
  s.end = std::stod(rest.substr(c2 + 1));
  if (s.step == 0) throw std::runtime_error("sweep step must be nonzero");
  if ((s.end - s.start) / s.step < 0) throw std::runtime_error("sweep range is empty");
  return s;
}

std::vector<double> sweep_points(const SweepSpec& s, std::uint64_t cap) {
  std::vector<double> pts;
  double v = s.start;
  for (std::uint64_t i = 0;; ++i) {
    v = s.start + static_cast<double>(i) * s.step;
    if (s.step > 0 ? v > s.end + 1e-12 * std::fabs(s.step) : v < s.end - 1e-12 * std::fabs(s.step))
      break;
    pts.push_back(v);
    if (pts.size() > cap) throw std::runtime_error("sweep grid exceeds point cap");
  }
  return pts;
}

Value sweep_value(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) return Value(static_cast<std::int64_t>(v));
  return Value(v);
}

struct CommonOpts {
  std::vector<std::string> consts;
  std::string method = "gauss-seidel";
  double epsilon = 1e-9;
  int max_iters = 10000;
  std::string format = "csv";
  std::string output;
};

void add_common(CLI::App* app, CommonOpts& o, bool solver = true) {
  app->add_option("--const", o.consts, "constant override NAME=VALUE (repeatable)");
  if (solver) {
    app->add_option("--method", o.method, "steady-state method: power|jacobi|gauss-seidel");
    app->add_option("--epsilon", o.epsilon, "convergence epsilon (relative)");
    app->add_option("--max-iters", o.max_iters, "iteration cap for steady-state solvers");
  }
  app->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--output", o.output, "write results to a file instead of stdout");
}

SolverOptions solver_options(const CommonOpts& o) {
  SolverOptions s;
  s.method = steady_method_from_string(o.method);
  s.epsilon = o.epsilon;
  s.max_iters = o.max_iters;
  return s;
}

std::ostream& open_output(const CommonOpts& o, std::ofstream& file) {
  if (o.output.empty()) return std::cout;
  file.open(o.output, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + o.output);
  return file;
}

// separates "the model/property text is bad" (exit 2) from solver trouble
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Overrides may name constants the model does not declare; those flow to
// the property layer (e.g. `--const T=...` for a time bound) instead of the
// model.
Overrides model_overrides(const std::string& text, const Overrides& all) {
  // scan `const [int|double] NAME` sequences
  std::set<std::string, std::less<>> declared;
  auto toks = detail::tokenize(text);
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (toks[i].kind != detail::Tok::Ident || toks[i].text != "const") continue;
    std::size_t j = i + 1;
    if (j < toks.size() && (toks[j].text == "int" || toks[j].text == "double")) ++j;
    if (j < toks.size() && toks[j].kind == detail::Tok::Ident) declared.insert(toks[j].text);
  }
  Overrides out;
  for (const auto& [k, v] : all)
    if (declared.count(k)) out[k] = v;
  return out;
}

std::string read_input(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::exception& e) {
    throw ModelError(e.what());
  }
}

std::tuple<ModelIR, StateSpace, Env> load_model(const std::string& path,
                                                const std::vector<std::string>& consts) {
  try {
    Overrides all = parse_overrides(consts);
    std::string text = read_input(path);
    ModelIR m = parse_model(text, model_overrides(text, all));
    auto diags = validate(m);
    if (!diags.empty()) {
      std::string msg = path + " failed validation:";
      for (const auto& d : diags)
        msg += "\n  line " + std::to_string(d.line) + ": " + d.message;
      throw ModelError(msg);
    }
    Env extra;
    for (const auto& [k, v] : all) extra[k] = v;
    return {std::move(m), build(m), std::move(extra)};
  } catch (const ParseError& e) {
    throw ModelError(path + ": " + e.what());
  } catch (const BuildError& e) {
    throw ModelError(path + ": " + e.what());
  } catch (const EvalError& e) {
    throw ModelError(path + ": " + e.what());
  } catch (const TypeError& e) {
    throw ModelError(path + ": " + e.what());
  }
}

struct Row {
  std::vector<std::pair<std::string, std::string>> cells;  // column -> text
};

void write_rows(std::ostream& os, const std::string& format,
                const std::vector<std::string>& columns, const std::vector<Row>& rows) {
  if (format == "json") {
    os << "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      os << (i ? ",\n " : "\n ") << "{";
      for (std::size_t j = 0; j < rows[i].cells.size(); ++j) {
        const auto& [k, v] = rows[i].cells[j];
        os << (j ? "," : "") << "\"" << json_escape(k) << "\":";
        // numbers stay bare; everything else gets quoted
        double d;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        bool numeric = ec == std::errc{} && p == v.data() + v.size();
        if (numeric) os << v;
        else os << "\"" << json_escape(v) << "\"";
      }
      os << "}";
    }
    os << "\n]\n";
    return;
  }
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.cells.size(); ++j)
      os << (j ? "," : "") << csv_quote(row.cells[j].second);
    os << "\n";
  }
}

int cmd_check(const std::string& model_path, const std::string& props_path, CommonOpts& o) {
  auto [model, space, extra] = load_model(model_path, o.consts);
  std::vector<Property> props;
  try {
    props = parse_property_file(read_input(props_path), model, extra);
  } catch (const ParseError& e) {
    throw ModelError(props_path + ": " + e.what());
  }
  SolverOptions sopts = solver_options(o);
  std::vector<Row> rows;
  for (const auto& p : props) {
    QueryResult r = evaluate(space, p, sopts);
    rows.push_back({{{"property", p.text},
                     {"value", fmt(r.value)},
                     {"method", r.method},
                     {"iterations", std::to_string(r.iterations)},
                     {"seconds", fmt(r.wall_seconds)}}});
  }
  std::ofstream file;
  write_rows(open_output(o, file), o.format,
             {"property", "value", "method", "iterations", "seconds"}, rows);
  return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& props_path,
              const std::vector<std::string>& sweeps_text, CommonOpts& o) {
  std::vector<SweepSpec> sweeps;
  for (const auto& s : sweeps_text) sweeps.push_back(parse_sweep(s));
  std::vector<std::vector<double>> grids;
  std::uint64_t total = 1;
  for (const auto& s : sweeps) {
    grids.push_back(sweep_points(s, 100000));
    total *= grids.back().size();
    if (total > 1000000) throw std::runtime_error("sweep grid exceeds point cap");
  }

  SolverOptions sopts = solver_options(o);
  std::vector<std::string> columns;
  for (const auto& s : sweeps) columns.push_back(s.name);
  columns.push_back("property");
  columns.push_back("value");

  std::vector<Row> rows;
  std::vector<std::size_t> idx(sweeps.size(), 0);
  for (std::uint64_t point = 0; point < total; ++point) {
    // row-major: last sweep varies fastest
    std::uint64_t rem = point;
    for (std::size_t k = sweeps.size(); k-- > 0;) {
      idx[k] = rem % grids[k].size();
      rem /= grids[k].size();
    }
    std::vector<std::string> consts = o.consts;
    for (std::size_t k = 0; k < sweeps.size(); ++k)
      consts.push_back(sweeps[k].name + "=" + fmt(grids[k][idx[k]]));
    std::vector<std::pair<std::string, std::string>> base;
    for (std::size_t k = 0; k < sweeps.size(); ++k)
      base.emplace_back(sweeps[k].name, fmt(grids[k][idx[k]]));
    try {
      auto [model, space, extra] = load_model(model_path, consts);
      auto props = parse_property_file(read_input(props_path), model, extra);
      for (const auto& p : props) {
        QueryResult r = evaluate(space, p, sopts);
        Row row{base};
        row.cells.emplace_back("property", p.text);
        row.cells.emplace_back("value", fmt(r.value));
        rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      std::cerr << "sweep point failed (" << e.what() << "); writing NaN\n";
      Row row{base};
      row.cells.emplace_back("property", "");
      row.cells.emplace_back("value", "NaN");
      rows.push_back(std::move(row));
    }
  }
  std::ofstream file;
  write_rows(open_output(o, file), o.format, columns, rows);
  return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& props_path, CommonOpts& o,
                 std::uint64_t samples, std::uint64_t seed, double horizon) {
  auto [model, space, extra] = load_model(model_path, o.consts);
  std::vector<Property> props;
  try {
    props = parse_property_file(read_input(props_path), model, extra);
  } catch (const ParseError& e) {
    throw ModelError(props_path + ": " + e.what());
  }
  SimOptions sim;
  sim.horizon_for_steady = horizon;
  std::vector<Row> rows;
  for (const auto& p : props) {
    Estimate est = estimate(space, p, samples, seed, sim);
    rows.push_back({{{"property", p.text},
                     {"estimate", fmt(est.value)},
                     {"std_error", est.std_error ? fmt(*est.std_error) : "NaN"},
                     {"samples", std::to_string(est.samples)},
                     {"seed", std::to_string(est.seed)}}});
  }
  std::ofstream file;
  write_rows(open_output(o, file), o.format,
             {"property", "estimate", "std_error", "samples", "seed"}, rows);
  return 0;
}

int cmd_routes(int n, const std::string& failed_csv, CommonOpts& o) {
  std::set<int> failed;
  if (!failed_csv.empty()) {
    std::istringstream is(failed_csv);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      int id = std::stoi(tok);
      if (id < 1 || id > n) throw std::runtime_error("failed tower id out of range: " + tok);
      failed.insert(id);
    }
  }
  RouteTable rt = compute_routes(LineTopology(n), failed);
  std::ofstream file;
  auto& os = open_output(o, file);
  if (o.format == "json") os << rt.to_json() << "\n";
  else os << rt.to_text() << rt.to_json() << "\n";
  return 0;
}

int cmd_info(const std::string& model_path, CommonOpts& o) {
  auto [model, space, extra] = load_model(model_path, o.consts);
  std::ofstream file;
  auto& os = open_output(o, file);
  os << "states: " << space.num_states() << "\n";
  os << "transitions: " << space.transitions().size() << " (matrix nonzeros: " << space.matrix_nnz()
     << ")\n";
  os << "labels:";
  for (const auto& l : space.labels()) os << " " << l;
  os << "\nrewards:";
  for (const auto& r : space.reward_names()) os << " " << r;
  os << "\nbottom components: " << bottom_sccs(space).size() << "\n";
  double max_exit = 0;
  for (double e : space.exit_rates()) max_exit = std::max(max_exit, e);
  os << "max exit rate: " << fmt(max_exit) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"explicit-state CTMC model checker for guarded-command models"};
  app.require_subcommand(1);

  CommonOpts check_o, sweep_o, sim_o, routes_o, info_o, gen_o;
  std::string model_path, props_path;

  auto* check = app.add_subcommand("check", "evaluate properties against a model");
  check->add_option("model", model_path)->required();
  check->add_option("props", props_path)->required();
  add_common(check, check_o);

  std::vector<std::string> sweeps;
  auto* sweep = app.add_subcommand("sweep", "evaluate properties over a constant grid");
  sweep->add_option("model", model_path)->required();
  sweep->add_option("props", props_path)->required();
  sweep->add_option("--sweep", sweeps, "NAME=start:step:end (repeatable)");
  add_common(sweep, sweep_o);

  std::uint64_t samples = 10000, seed = 1;
  double horizon = 1e6;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates for properties");
  sim->add_option("model", model_path)->required();
  sim->add_option("props", props_path)->required();
  sim->add_option("--samples", samples, "number of samples / batches");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--horizon", horizon, "total simulated hours for steady-state queries");
  add_common(sim, sim_o, false);

  int n_towers = 10;
  std::string failed_csv;
  auto* routes = app.add_subcommand("routes", "print the routing table for a failure set");
  routes->add_option("--n", n_towers, "number of towers");
  routes->add_option("--failed", failed_csv, "comma-separated failed tower ids");
  add_common(routes, routes_o, false);

  auto* info = app.add_subcommand("info", "model statistics");
  info->add_option("model", model_path)->required();
  add_common(info, info_o, false);

  std::string gen_kind;
  auto* gen = app.add_subcommand("gen", "emit a generated model as text");
  gen->add_option("kind", gen_kind, "line|tower|compact")
      ->required()
      ->check(CLI::IsMember({"line", "tower", "compact"}));
  GridParams gp;
  TowerParams tp;
  LineParams lp;
  gen->add_option("--towers", lp.n_towers, "line: number of towers");
  gen->add_option("--max-failures", lp.max_failures_encoded, "line: failures encoded in guards");
  gen->add_option("--sensors", tp.n_sensors, "tower: number of sensors");
  gen->add_option("--rfail", tp.r_fail, "tower: failure rate per hour");
  gen->add_option("--rrecover", tp.r_recover, "tower: recovery rate per hour");
  gen->add_option("--rsend", tp.r_send, "tower: packet rate per hour");
  gen->add_option("--max-tracked", tp.max_failure_tracked, "tower: failcount range");
  gen->add_option("--size-bn", gp.size_bn, "compact: number of bone nodes");
  gen->add_option("--size-sn", gp.size_sn, "compact: sensors per tower");
  gen->add_option("--max-bn-fail", gp.max_bn_fail, "compact: tolerated bone node failures");
  gen->add_option("--max-sn-fail", gp.max_sn_fail, "compact: tolerated sensor failures");
  add_common(gen, gen_o, false);

  std::vector<std::string> argv_copy = args;
  std::vector<char*> argv;
  argv.reserve(args.size());
  static const std::string prog = "gridmc";
  argv.push_back(const_cast<char*>(prog.c_str()));
  for (auto& a : argv_copy) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(model_path, props_path, check_o);
    if (sweep->parsed()) return cmd_sweep(model_path, props_path, sweeps, sweep_o);
    if (sim->parsed()) return cmd_simulate(model_path, props_path, sim_o, samples, seed, horizon);
    if (routes->parsed()) return cmd_routes(n_towers, failed_csv, routes_o);
    if (info->parsed()) return cmd_info(model_path, info_o);
    if (gen->parsed()) {
      std::string text;
      if (gen_kind == "line") text = build_line(lp);
      else if (gen_kind == "tower") text = build_tower(tp);
      else text = build_compact(gp);
      std::ofstream file;
      open_output(gen_o, file) << text;
      return 0;
    }
  } catch (const ModelError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gridmc
