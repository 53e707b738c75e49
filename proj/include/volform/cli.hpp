#ifndef VOLFORM_CLI_HPP
#define VOLFORM_CLI_HPP

// Command-line front end: integrate, classify, volcheck, order.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "error.hpp"
#include "fields.hpp"
#include "perm3.hpp"
#include "schemes.hpp"
#include "verify.hpp"

namespace volform::cli {

enum Exit { ok = 0, threshold = 1, config = 2, solver = 3 };

/// Failure carrying its machine-readable prefix and exit code.
struct Failure
{
  std::string prefix;
  int code;
  std::string message;
};

inline Failure failure_of(const Error& e)
{
  switch (e.code()) {
  case ErrorCode::TwistViolation:
  case ErrorCode::NewtonDivergence:
  case ErrorCode::QuadratureFailure:
    return {"E_SOLVER", solver, e.what()};
  case ErrorCode::LegendreFailure:
  case ErrorCode::TwistDegenerate:
  case ErrorCode::DegenerateCoefficient:
  case ErrorCode::StepTooLarge:
  case ErrorCode::SelfReference:
    return {"E_DEGENERATE", solver, e.what()};
  default:
    return {"E_CONFIG", config, e.what()};
  }
}

inline Error config_error(const std::string& what) { return Error(ErrorCode::InvalidConfig, what); }

// -- field specs ---------------------------------------------------------------

inline Mat3 matrix_of(const nlohmann::json& j)
{
  if (!j.is_array() || j.size() != 3)
    throw config_error("\"matrix\" must be a 3x3 array");
  Mat3 A{};
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_array() || j[i].size() != 3)
      throw config_error("\"matrix\" must be a 3x3 array");
    for (int k = 0; k < 3; ++k)
      A[i][k] = j[i][k].get<double>();
  }
  return A;
}

inline std::optional<ScalarFn> quad_potential(const nlohmann::json& j, const char* key)
{
  if (!j.contains(key) || j[key].is_null())
    return std::nullopt;
  const auto flat = j[key].get<std::vector<double>>();
  return ScalarFn::from_quad(QuadForm::from_flat(flat));
}

/// {"type":"linear","matrix":[[..],[..],[..]]} | {"type":"abc","A":r,"B":r,"C":r}
/// | {"type":"quad-potentials","F1":[28 reals],"F2":...,"F3":...}
inline Field3 field_from_json(const nlohmann::json& j)
{
  try {
    if (!j.is_object() || !j.contains("type"))
      throw config_error("field spec needs a \"type\"");
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear")
      return make_linear_field(LinearField(matrix_of(j.at("matrix"))));
    if (type == "abc")
      return make_abc_field({j.at("A").get<double>(), j.at("B").get<double>(), j.at("C").get<double>()});
    if (type == "quad-potentials") {
      PotentialTriple p;
      p.F = {quad_potential(j, "F1"), quad_potential(j, "F2"), quad_potential(j, "F3")};
      Field3 f = field_from_potentials(p);
      f.name = "quad-potentials";
      return f;
    }
    throw Error(ErrorCode::UnknownField, "unknown field type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("malformed field spec: ") + e.what());
  }
}

inline Field3 load_field(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw config_error("cannot open field file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("cannot parse field file '" + path + "': " + e.what());
  }
  return field_from_json(j);
}

inline Vec3 parse_vec3(const std::string& text)
{
  std::istringstream is(text);
  std::string tok;
  Vec3 v{};
  int n = 0;
  while (std::getline(is, tok, ',')) {
    if (n == 3)
      throw config_error("expected three comma-separated numbers, got '" + text + "'");
    try {
      std::size_t used = 0;
      v[n] = std::stod(tok, &used);
      if (used != tok.size())
        throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw config_error("expected three comma-separated numbers, got '" + text + "'");
    }
    ++n;
  }
  if (n != 3)
    throw config_error("expected three comma-separated numbers, got '" + text + "'");
  return v;
}

inline std::string vec_text(const Vec3& x)
{
  return "(" + format_double(x[0]) + ", " + format_double(x[1]) + ", " + format_double(x[2]) + ")";
}

inline SolverConfig solver_config()
{
  SolverConfig cfg;
  if (const char* env = std::getenv("VOLFORM_NEWTON_TOL")) {
    try {
      std::size_t used = 0;
      const std::string s(env);
      cfg.newton_tol = std::stod(s, &used);
      if (used != s.size() || !(cfg.newton_tol > 0.0))
        throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
      throw config_error(std::string("VOLFORM_NEWTON_TOL must be a positive number, got '") + env + "'");
    }
  }
  return cfg;
}

/// Writes to --out when given, else to the console stream.
inline void emit(const std::string& path, const std::string& text, std::ostream& console)
{
  if (path.empty()) {
    console << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw config_error("cannot write '" + path + "'");
  f << text;
}

struct Options
{
  std::string field;
  std::string scheme;
  double h = 0.01;
  long steps = 100;
  std::string x0 = "0.1,0.2,0.3";
  double T = 1.0;
  double h0 = 0.2;
  int levels = 4;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  double box = 1.0;
  std::string out;
  long audit_every = 100;
  double fail_above = std::numeric_limits<double>::infinity();
  std::string sigma;
  std::string Sigma;
};

// -- subcommands ---------------------------------------------------------------

inline int cmd_integrate(const Options& o, std::ostream& out)
{
  if (o.steps < 1)
    throw config_error("--steps must be at least 1");
  if (o.audit_every < 1)
    throw config_error("--audit-every must be at least 1");
  const Field3 field = load_field(o.field);
  const SchemeHandle s = make_scheme(o.scheme, field, o.h, solver_config());
  Vec3 x = parse_vec3(o.x0);
  std::ostringstream csv;
  csv << "step,t,x1,x2,x3,det_defect\n";
  for (long k = 0; k <= o.steps; ++k) {
    csv << k << ',' << format_double(static_cast<double>(k) * o.h) << ',' << format_double(x[0]) << ','
        << format_double(x[1]) << ',' << format_double(x[2]) << ',';
    try {
      if (k % o.audit_every == 0)
        csv << format_double(volume_defect(s, x));
      csv << '\n';
      if (k < o.steps)
        x = s.step(x);
    } catch (const Error& e) {
      std::string what = e.what();
      what = what.substr(what.find(": ") + 2);
      throw Error(e.code(), what + " at step " + std::to_string(k) + ", x = " + vec_text(x));
    }
  }
  emit(o.out, csv.str(), out);
  return ok;
}

inline int cmd_classify(const Options& o, std::ostream& out)
{
  const Permutation sigma = Permutation::parse(o.sigma);
  const Permutation Sigma = Permutation::parse(o.Sigma);
  const PairClass c = classify(sigma, Sigma);
  std::ostringstream os;
  os << "class: " << to_string(c.label) << '\n';
  os << "tau: " << (c.tau.is_identity() ? std::string("identity") : c.tau.to_string()) << '\n';
  os << "sign(tau): " << sign(c.tau) << '\n';
  os << "relabel: " << c.relabel.to_string() << '\n';
  os << "adjoint: " << (c.adjoint_flag ? "yes" : "no") << '\n';
  os << "canonical tau: " << canonical_tau(c.label).to_string() << '\n';
  os << render_conditions(sigma, Sigma);
  emit(o.out, os.str(), out);
  return ok;
}

inline int cmd_volcheck(const Options& o, std::ostream& out)
{
  if (o.samples < 1)
    throw config_error("--samples must be at least 1");
  if (!(o.box > 0.0))
    throw config_error("--box must be positive");
  const Field3 field = load_field(o.field);
  const SchemeHandle s = make_scheme(o.scheme, field, o.h, solver_config());
  const VolumeAudit a = volume_audit(s, sample_points(o.samples, o.seed, o.box));
  const std::string summary = audit_summary(a) + '\n';
  if (o.out.empty()) {
    out << audit_csv(a) << summary;
  } else {
    emit(o.out, audit_csv(a) + summary, out);
    out << summary;
  }
  return a.max_defect > o.fail_above ? threshold : ok;
}

inline int cmd_order(const Options& o, std::ostream& out)
{
  if (o.levels < 1)
    throw config_error("--levels must be at least 1");
  if (!(o.h0 > 0.0))
    throw config_error("--h0 must be positive");
  const Field3 field = load_field(o.field);
  std::vector<double> hs;
  for (int k = 0; k < o.levels; ++k)
    hs.push_back(o.h0 / std::pow(2.0, k));
  const OrderReport rep = observed_order(o.scheme, field, parse_vec3(o.x0), o.T, hs, solver_config());
  const std::string table = order_table(rep);
  emit(o.out, table, out);
  if (!o.out.empty())
    out << "slope: " << (std::isnan(rep.slope) ? std::string("n/a") : format_double(rep.slope)) << '\n';
  return ok;
}

/// Runs the tool; all diagnostics go to `err` as one line with an E_* prefix.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  Options o;
  CLI::App app{"Volume-preserving integrators from generating one-forms"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  auto* integrate = app.add_subcommand("integrate", "integrate a trajectory to CSV");
  auto* classify_cmd = app.add_subcommand("classify", "classify a (sigma, Sigma) pair");
  auto* volcheck = app.add_subcommand("volcheck", "audit |det J - 1| at random points");
  auto* order = app.add_subcommand("order", "observed order of convergence");

  for (auto* sub : {integrate, volcheck, order}) {
    sub->add_option("--field", o.field, "field spec (JSON)")->required();
    sub->add_option("--scheme", o.scheme, "scheme name")->required();
    sub->add_option("--out", o.out, "output file");
  }
  integrate->add_option("--h", o.h, "step size");
  integrate->add_option("--steps", o.steps, "number of steps");
  integrate->add_option("--x0", o.x0, "initial point a,b,c");
  integrate->add_option("--audit-every", o.audit_every, "defect column period");
  volcheck->add_option("--h", o.h, "step size");
  volcheck->add_option("--samples", o.samples, "number of audit points");
  volcheck->add_option("--seed", o.seed, "RNG seed");
  volcheck->add_option("--box", o.box, "half-width of the sampling box");
  volcheck->add_option("--fail-above", o.fail_above, "exit 1 when the max defect exceeds this");
  order->add_option("--x0", o.x0, "initial point a,b,c");
  order->add_option("--T", o.T, "final time");
  order->add_option("--h0", o.h0, "coarsest step");
  order->add_option("--levels", o.levels, "number of halvings");
  classify_cmd->add_option("--sigma", o.sigma, "old permutation a,b,c")->required();
  classify_cmd->add_option("--Sigma", o.Sigma, "new permutation a,b,c")->required();
  classify_cmd->add_option("--out", o.out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "E_CONFIG: " << e.what() << '\n';
    return config;
  }

  try {
    if (*integrate)
      return cmd_integrate(o, out);
    if (*classify_cmd)
      return cmd_classify(o, out);
    if (*volcheck)
      return cmd_volcheck(o, out);
    return cmd_order(o, out);
  } catch (const Error& e) {
    const Failure f = failure_of(e);
    err << f.prefix << ": " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "E_CONFIG: " << e.what() << '\n';
    return config;
  }
}

} // namespace volform::cli

#endif
