#include "cbcond/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbcond/config.hpp"
#include "cbcond/errors.hpp"
#include "cbcond/extinction.hpp"
#include "cbcond/laws.hpp"
#include "cbcond/montecarlo.hpp"
#include "cbcond/quadrature.hpp"
#include "cbcond/reference.hpp"
#include "cbcond/scale.hpp"

namespace cbcond::cli {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},     {"config_hash", config_hash}, {"seed", seed},
          {"version", version},     {"wall_time_s", wall_time},   {"outputs", outputs}};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

using nlohmann::json;

struct Options {
  std::string mech;
  std::uint64_t seed = 1;
  std::optional<std::size_t> n;
  std::string out;
  std::optional<double> tol;
  unsigned workers = 1;

  std::string lambda_list;
  std::string grid;
  std::string t_list;
  double x = 1.0;
  std::optional<double> t;
  std::optional<double> s;
  std::optional<double> q;
  std::optional<double> beta;
  std::optional<double> lambda;
  double xmin = 0.01;
  double xmax = 10.0;
  bool log_spacing = false;
  bool closed_form = false;
  bool mass = false;
  EulerParams euler;
  std::string kind;
  std::string experiment;
  std::string family;
  std::string quantity;
  std::string args;
  double dt = 1e-3;
  double eps = 1e-3;
  std::size_t cdf_points = 50;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> command_line;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("cannot parse ") + what + " value '" + item + "'");
    }
  }
  return v;
}

std::vector<double> make_grid(double lo, double hi, std::size_t n, bool log_spacing) {
  if (n == 0) throw ConfigError("grid needs at least one point");
  if (!(hi >= lo)) throw ConfigError("grid needs max >= min");
  if (log_spacing && !(lo > 0.0)) throw ConfigError("log-spaced grid needs a positive minimum");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = log_spacing ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
  }
  return g;
}

// --lambda list, or --grid "lo,hi,n" (log spaced).
std::vector<double> lambda_values(const Options& o) {
  if (!o.grid.empty()) {
    const auto g = parse_list(o.grid, "--grid");
    if (g.size() != 3 || g[2] < 1) throw ConfigError("--grid expects lo,hi,n");
    return make_grid(g[0], g[1], static_cast<std::size_t>(g[2]), true);
  }
  if (o.lambda_list.empty()) throw ConfigError("give --lambda values or --grid lo,hi,n");
  return parse_list(o.lambda_list, "--lambda");
}

struct Loaded {
  BranchingMechanism m;
  std::string bytes;
};

Loaded load(const Options& o) {
  if (o.mech.empty()) throw ConfigError("--mech PATH is required");
  std::string bytes = read_file(o.mech);
  json doc = parse_config_text(bytes);
  if (o.tol) {
    if (!doc.is_object()) throw ConfigError("mechanism config must be a JSON object");
    doc["tol"] = *o.tol;
  }
  return {mechanism_from_json(doc), std::move(bytes)};
}

InversionConfig inversion(const Options& o) {
  InversionConfig c;
  c.euler = o.euler;
  c.prefer_closed_form = o.closed_form;
  return c;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {
    for (std::size_t i = 0; i < header_.size(); ++i) text_ << (i ? "," : "") << header_[i];
    text_ << '\n';
  }
  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << format_number(cells[i]);
    text_ << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  std::vector<std::string> header_;
  std::ostringstream text_;
};

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << content;
}

// Writes outputs plus manifest.json into --out when given.
void emit_files(const Context& ctx, const Options& o, const std::string& command,
                const std::string& config_bytes,
                const std::vector<std::pair<std::string, std::string>>& files) {
  if (o.out.empty()) return;
  std::filesystem::create_directories(o.out);
  RunManifest man;
  man.command = command;
  man.config_hash = fnv1a_hex(config_bytes);
  man.seed = o.seed;
  for (const auto& [name, content] : files) {
    write_file(std::filesystem::path(o.out) / name, content);
    man.outputs.push_back(name);
  }
  man.outputs.push_back("manifest.json");
  man.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  write_file(std::filesystem::path(o.out) / "manifest.json", man.to_json().dump(2) + "\n");
}

void emit_csv(Context& ctx, const Options& o, const std::string& command,
              const std::string& config_bytes, const Csv& csv) {
  ctx.out << csv.str();
  emit_files(ctx, o, command, config_bytes, {{command + ".csv", csv.str()}});
}

// ---------------------------------------------------------------------------
// info / verify

int cmd_info(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const BranchingMechanism& m = l.m;
  const MechanismClass c = classify(m);
  auto& out = ctx.out;
  out << "mechanism: alpha = " << format_number(m.alpha()) << ", sigma2 = " << format_number(m.sigma2());
  if (m.closed_form()) out << ", closed form " << m.closed_form()->name();
  out << "\n";
  out << "criticality: " << to_string(c.criticality) << "\n";
  out << "gamma: 0 (the largest root of psi; supercritical mechanisms are rejected)\n";
  out << "grey: " << (c.grey_holds ? "holds" : "fails")
      << " (int_1^inf dl/psi(l) = " << format_number(c.grey_integral) << ")\n";
  out << "potential: E_x[ζ] " << (c.potential_finite ? "finite" : "infinite")
      << " (int_0^1 u/psi(u) du = " << format_number(c.potential_integral) << ")\n";
  out << "xlogx: " << (c.xlogx_holds ? "holds" : "fails")
      << " (alpha > 0 and int_1^inf r ln r pi(dr) = " << format_number(c.xlogx_integral) << ")\n";
  out << to_string(c.criticality) << "; Grey " << (c.grey_holds ? "holds" : "fails")
      << "; E_x[ζ] " << (c.potential_finite ? "finite" : "infinite");
  if (c.criticality == Criticality::Subcritical) {
    out << "; xlogx " << (c.xlogx_holds ? "holds" : "fails");
  }
  out << "\n";
  return kOk;
}

GateResult gate(const std::string& name, double threshold, const std::function<double()>& measure) {
  GateResult g;
  g.name = name;
  g.threshold = threshold;
  try {
    g.measured = measure();
    g.status = (g.measured <= threshold) ? "pass" : "FAIL";
  } catch (const Error& e) {
    g.status = "FAIL";
    g.measured = std::numeric_limits<double>::quiet_NaN();
    g.note = e.what();
  }
  return g;
}

GateResult not_applicable(const std::string& name, const std::string& why) {
  GateResult g;
  g.name = name;
  g.status = "n/a";
  g.note = why;
  return g;
}

std::vector<GateResult> verify_gates(const BranchingMechanism& m, const InversionConfig& inv) {
  const ExtinctionKernel k(m);
  const ScaleFunction sf(k, inv);
  const MechanismClass c = classify(m);
  const bool sub = c.criticality == Criticality::Subcritical;
  const double a = m.alpha();
  std::vector<GateResult> gates;

  gates.push_back(gate("laplace_roundtrip", 1e-6, [&] {
    double worst = 0.0;
    for (double l : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      const double v =
          quad::exp_sinh([&](double x) { return std::exp(-l * x) * sf.W(x); }, 0.0, 1e-10);
      worst = std::max(worst, std::abs(v * m.psi(l) - 1.0));
    }
    return worst;
  }));
  gates.push_back(gate("flow_property", 1e-7, [&] {
    double worst = 0.0;
    for (double t : {0.1, 1.0, 5.0}) {
      for (double s : {0.1, 1.0, 5.0}) {
        for (double l : {0.1, 1.0, 10.0}) {
          const double lhs = k.u_t(t + s, l);
          worst = std::max(worst, std::abs(lhs - k.u_t(t, k.u_t(s, l))) / lhs);
        }
      }
    }
    return worst;
  }));
  gates.push_back(gate("ode_crosscheck", 1e-6, [&] {
    double worst = 0.0;
    for (double t : {0.5, 2.0}) {
      for (double l : {0.5, 5.0}) {
        const double u = k.u_t(t, l);
        worst = std::max(worst, std::abs(k.u_t_ode(t, l) - u) / u);
      }
    }
    return worst;
  }));
  gates.push_back(gate("stationarity_identity", 1e-9, [&] {
    double worst = 0.0;
    for (double t : {0.1, 0.5, 1.0, 5.0, 10.0}) {
      for (double l : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        worst = std::max(worst, std::abs(k.phi(k.u_t(t, l)) - t - k.phi(l)));
      }
    }
    return worst;
  }));
  if (sub) {
    gates.push_back(gate("transition_limit_subcritical", 1e-4, [&] {
      return std::abs(normalized_transition_transform(k, 1.0, 30.0 / a, 1.0) -
                      normalized_transition_limit(k, 1.0));
    }));
  } else {
    gates.push_back(gate("transition_limit_critical", 2e-4, [&] {
      return std::abs(normalized_transition_transform(k, 1.0, 1e5, 1.0) -
                      normalized_transition_limit(k, 1.0));
    }));
  }
  gates.push_back(gate("vague_limit_x50", 1e-4, [&] {
    double worst = 0.0;
    for (double l : {1.0, 2.0}) worst = std::max(worst, std::abs(sf.potential_laplace(50.0, l) - k.phi(l)));
    return worst;
  }));
  gates.push_back(gate("mu_s_mass", 1e-6, [&] {
    auto f = [&](double x) { return mu_s_density(sf, 1.0, x); };
    return std::abs(quad::tanh_sinh(f, 0.0, 1.0, 1e-10) + quad::exp_sinh(f, 1.0, 1e-10) - 1.0);
  }));
  gates.push_back(gate("vq_closed_vs_integral", 1e-7, [&] {
    double worst = 0.0;
    for (double q : {0.5, 1.0, 2.0}) {
      for (double l : {0.5, 1.0, 2.0}) {
        worst = std::max(worst, std::abs(vq_laplace_exponent(k, q, l) -
                                         vq_laplace_exponent_integral(k, q, l)));
      }
    }
    return worst;
  }));
  gates.push_back(gate("vq_triplet_frullani", 1e-4, [&] {
    double worst = 0.0;
    for (double q : {0.5, 1.0, 2.0}) {
      std::map<double, double> vq;
      auto v = [&](double x) {
        auto it = vq.find(x);
        if (it == vq.end()) it = vq.emplace(x, vq_levy_density(sf, q, x)).first;
        return it->second;
      };
      for (double l : {0.5, 1.0, 2.0}) {
        auto f = [&](double x) { return -std::expm1(-l * x) * v(x) / x; };
        // v_q carries the factor exp(-varphi(q) x); beyond 40/varphi(q) it is below 1e-17.
        const double cut = std::max(2.0, 40.0 / k.varphi(q));
        const double lhs = quad::tanh_sinh(f, 0.0, 1.0, 1e-8) + quad::tanh_sinh(f, 1.0, cut, 1e-8);
        worst = std::max(worst, std::abs(lhs - vq_laplace_exponent(k, q, l)));
      }
    }
    return worst;
  }));
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0};
  gates.push_back(gate("size_bias_vq_wq", 1e-4, [&] {
    return size_bias_residual(vq_law(sf, 1.0), ws_law(k, 1.0), grid);
  }));
  if (sub && c.xlogx_holds) {
    gates.push_back(gate("size_bias_vinf_yaglom", 1e-4, [&] {
      return size_bias_residual(vinf_law(k), yaglom_law(k), grid);
    }));
  } else {
    gates.push_back(not_applicable("size_bias_vinf_yaglom", sub ? "x log x fails" : "critical"));
  }
  if (sub) {
    gates.push_back(gate("qsd_ordering", 0.0, [&] {
      double violation = 0.0;
      for (double l : grid) {
        double prev = 0.0;
        for (double b : {0.25 * a, 0.5 * a, a}) {
          const double v = qsd_lt(k, b, l);
          violation = std::max(violation, prev - v);
          prev = v;
        }
      }
      return violation;
    }));
  } else {
    gates.push_back(not_applicable("qsd_ordering", "critical"));
  }
  return gates;
}

int cmd_verify(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const auto gates = verify_gates(l.m, inversion(o));
  bool ok = true;
  auto& out = ctx.out;
  out << std::left << std::setw(30) << "gate" << std::setw(8) << "status" << std::setw(18)
      << "measured" << "threshold\n";
  for (const auto& g : gates) {
    const bool na = g.status == "n/a";
    out << std::setw(30) << g.name << std::setw(8) << g.status << std::setw(18)
        << (na ? "-" : format_number(g.measured)) << (na ? "-" : format_number(g.threshold));
    if (na) {
      out << "  n/a (" << g.note << ")";
    } else if (!g.note.empty()) {
      out << "  " << g.note;
    }
    out << "\n";
    if (g.status == "FAIL") ok = false;
  }
  out << (ok ? "all gates pass\n" : "gate failure\n");
  return ok ? kOk : kFailure;
}

// ---------------------------------------------------------------------------
// Tables

int cmd_phi(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ExtinctionKernel k(l.m);
  Csv csv({"lambda", "phi", "est_error"});
  for (double lam : lambda_values(o)) {
    double e = 0.0;
    const double v = k.phi(lam, &e);
    csv.row({lam, v, e});
  }
  emit_csv(ctx, o, "phi", l.bytes, csv);
  return kOk;
}

int cmd_varphi(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ExtinctionKernel k(l.m);
  if (o.t_list.empty()) throw ConfigError("give --t values");
  Csv csv({"t", "varphi", "est_error", "capped", "underflow"});
  for (double t : parse_list(o.t_list, "--t")) {
    const VarphiValue v = k.varphi_checked(t);
    const double e = (v.capped || v.underflow) ? std::numeric_limits<double>::quiet_NaN()
                                               : k.varphi_error(t);
    csv.row({t, v.value, e, v.capped ? 1.0 : 0.0, v.underflow ? 1.0 : 0.0});
  }
  emit_csv(ctx, o, "varphi", l.bytes, csv);
  return kOk;
}

int cmd_ut(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ExtinctionKernel k(l.m);
  if (o.t_list.empty()) throw ConfigError("give --t values");
  Csv csv({"t", "lambda", "u_t", "est_error"});
  for (double t : parse_list(o.t_list, "--t")) {
    for (double lam : lambda_values(o)) {
      const double u = k.u_t(t, lam);
      const double e = t == 0.0 ? 0.0 : k.varphi_error(t + k.phi(lam));
      csv.row({t, lam, u, e});
    }
  }
  emit_csv(ctx, o, "ut", l.bytes, csv);
  return kOk;
}

int cmd_extinction(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ExtinctionKernel k(l.m);
  if (o.t_list.empty()) throw ConfigError("give --t values");
  Csv csv({"t", "cdf", "pdf", "est_error"});
  for (double t : parse_list(o.t_list, "--t")) {
    const double cdf = k.extinction_cdf(o.x, t);
    csv.row({t, cdf, k.extinction_pdf(o.x, t), o.x * cdf * k.varphi_error(t)});
  }
  emit_csv(ctx, o, "extinction", l.bytes, csv);
  return kOk;
}

int cmd_scale_table(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ScaleFunction sf(ExtinctionKernel(l.m), inversion(o));
  Csv csv({"x", "W", "W_prime", "mu_density"});
  for (double x : make_grid(o.xmin, o.xmax, o.n.value_or(50), o.log_spacing)) {
    if (!(x > 0.0)) throw ConfigError("scale-table needs xmin > 0");
    csv.row({x, sf.W(x), sf.W_prime(x), sf.stationary_density(x)});
  }
  emit_csv(ctx, o, "scale-table", l.bytes, csv);
  return kOk;
}

int cmd_potential(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ScaleFunction sf(ExtinctionKernel(l.m), inversion(o));
  if (o.mass) {
    Csv csv({"x", "potential_mass"});
    const auto mass = sf.potential_mass(o.x);
    csv.row({o.x, mass ? *mass : std::numeric_limits<double>::infinity()});
    emit_csv(ctx, o, "potential", l.bytes, csv);
    return kOk;
  }
  Csv csv({"y", "g"});
  for (double y : make_grid(o.xmin, o.xmax, o.n.value_or(50), o.log_spacing)) {
    csv.row({y, sf.potential_density(o.x, y)});
  }
  emit_csv(ctx, o, "potential", l.bytes, csv);
  return kOk;
}

double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw ConfigError(std::string("missing ") + flag);
  return *v;
}

int cmd_law(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ScaleFunction sf(ExtinctionKernel(l.m), inversion(o));
  const ExtinctionKernel& k = sf.kernel();
  if (o.kind.empty()) throw ConfigError("missing --kind");
  const LawKind kind = parse_law_kind(o.kind);
  std::optional<LimitLaw> law;
  switch (kind) {
    case LawKind::QSD: law.emplace(qsd_law(k, need(o.beta, "--beta"))); break;
    case LawKind::Yaglom: law.emplace(yaglom_law(k)); break;
    case LawKind::MuS: law.emplace(mu_s_law(sf, need(o.s, "--s"))); break;
    case LawKind::Ws: law.emplace(ws_law(k, need(o.s, "--s"))); break;
    case LawKind::Vq: law.emplace(vq_law(sf, need(o.q, "--q"))); break;
    case LawKind::Vinf: law.emplace(vinf_law(k)); break;
  }
  std::vector<std::string> header{"lambda", "transform"};
  if (law->has_density()) header.push_back("density");
  Csv csv(header);
  for (double lam : lambda_values(o)) {
    if (law->has_density()) {
      csv.row({lam, law->laplace(lam), law->density(lam)});
    } else {
      csv.row({lam, law->laplace(lam)});
    }
  }
  emit_csv(ctx, o, "law", l.bytes, csv);
  return kOk;
}

int cmd_levy_triplet(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const ScaleFunction sf(ExtinctionKernel(l.m), inversion(o));
  const double q = need(o.q, "--q");
  Csv csv({"x", "v_q", "levy_density"});
  for (double x : make_grid(o.xmin, o.xmax, o.n.value_or(50), o.log_spacing)) {
    const double v = vq_levy_density(sf, q, x);
    csv.row({x, v, v / x});
  }
  emit_csv(ctx, o, "levy-triplet", l.bytes, csv);
  return kOk;
}

int cmd_oracle(Context& ctx, const Options& o) {
  if (o.family.empty() || o.quantity.empty()) throw ConfigError("oracle needs --family and --quantity");
  const OracleFamily f = OracleFamily::parse(o.family);
  const auto args = parse_list(o.args, "--args");
  Csv csv({"value"});
  csv.row({oracle_eval(f, o.quantity, args)});
  ctx.out << csv.str();
  return kOk;
}

// ---------------------------------------------------------------------------
// Monte Carlo

json diagnostics_json(const McDiagnostics& d) {
  json j = {{"acceptance_rate", d.acceptance_rate}, {"draws", d.draws},
            {"excluded", d.excluded},               {"unabsorbed", d.unabsorbed},
            {"p_positive", d.p_positive}};
  if (d.weight_mean) {
    j["weight_mean"] = d.weight_mean->estimate;
    j["weight_half_width"] = d.weight_mean->half_width;
  }
  return j;
}

int cmd_mc(Context& ctx, const Options& o) {
  const Loaded l = load(o);
  const BranchingMechanism& m = l.m;
  const ExtinctionKernel k(m);
  SimConfig cfg;
  cfg.seed = o.seed;
  cfg.n_paths = o.n.value_or(100000);
  cfg.workers = o.workers;
  cfg.dt = o.dt;
  cfg.eps = o.eps;
  validate(cfg);
  const double x = o.x;
  const double lam = o.lambda.value_or(1.0);
  const std::string& name = o.experiment;

  json j;
  j["experiment"] = name;
  j["seed"] = cfg.seed;
  j["n"] = cfg.n_paths;
  j["workers"] = cfg.workers;
  j["x"] = x;
  j["lambda"] = lam;

  auto family = [&]() {
    auto f = OracleFamily::detect(m);
    if (!f || !f->has_cluster_decomposition()) {
      throw ConfigError("experiment '" + name +
                        "' needs the quadratic or linear_plus_quadratic mechanism; "
                        "use 'mc lamperti' for general mechanisms");
    }
    j["family"] = f->name();
    return *f;
  };
  auto report = [&](const EmpiricalLaw& law, double target) {
    const McEstimate e = law.laplace(lam);
    j["estimate"] = e.estimate;
    j["half_width"] = e.half_width;
    j["ess"] = e.ess;
    j["target"] = target;
    j["residual"] = std::abs(e.estimate - target);
    j["diagnostics"] = diagnostics_json(law.diagnostics);
  };

  std::optional<EmpiricalLaw> curve;
  if (name == "near-extinction") {
    const OracleFamily f = family();
    const double t = o.t.value_or(50.0);
    const double s = o.s.value_or(1.0);
    j["t"] = t;
    j["s"] = s;
    curve = mc_near_extinction(f, x, t, s, cfg);
    report(*curve, ws_lt(k, s, lam));
    const GammaLaw g = f.ws_law(s);
    j["ks"] = curve->ks([&](double z) { return g.cdf(z); });
    j["ks_reference"] = "W_s";
  } else if (name == "fixed-time") {
    const OracleFamily f = family();
    const double q = o.q.value_or(1.0);
    const double t = o.t.value_or(60.0);
    j["t"] = t;
    j["q"] = q;
    curve = mc_fixed_time(f, x, t, q, cfg);
    report(*curve, vq_lt(k, q, lam));
  } else if (name == "reverse") {
    const OracleFamily f = family();
    const double q = o.q.value_or(1.0);
    j["q"] = q;
    curve = mc_reverse_from_extinction(f, x, q, cfg);
    report(*curve, vq_lt(k, q, lam));
    j["reverse_limit"] = reverse_limit_lt(k, q, lam);
    j["reverse_limit_residual"] = std::abs(j["estimate"].get<double>() - reverse_limit_lt(k, q, lam));
  } else if (name == "qprocess") {
    const OracleFamily f = family();
    const double t = o.t.value_or(20.0);
    j["t"] = t;
    curve = mc_qprocess(f, x, t, cfg);
    if (vinf_exists(m)) {
      report(*curve, vinf_lt(k, lam));
    } else {
      report(*curve, 0.0);
      j["target_note"] = "V_inf degenerate: transform decays to 0";
      json decay = json::array();
      for (double tt : {1.0, 10.0, 100.0, 1000.0}) {
        const McEstimate e = mc_qprocess(f, x, tt, cfg).laplace(lam);
        decay.push_back({{"t", tt}, {"estimate", e.estimate}, {"half_width", e.half_width}});
      }
      j["decay"] = decay;
    }
  } else if (name == "yaglom-rescaled") {
    const OracleFamily f = family();
    if (!m.critical()) throw ConfigError("yaglom-rescaled needs a critical mechanism");
    const double t = o.t.value_or(1e4);
    j["t"] = t;
    curve = mc_yaglom_rescaled(f, x, t, cfg);
    report(*curve, rescaled_conditional_transform(k, x, t, lam));
    j["analytic_limit"] = 1.0 / (1.0 + lam);
  } else if (name == "transition") {
    const OracleFamily f = family();
    const double t = o.t.value_or(1.0);
    j["t"] = t;
    curve = transitions_exact(f, x, t, cfg);
    report(*curve, std::exp(-x * k.u_t(t, lam)));
  } else if (name == "lamperti") {
    const double t = o.t.value_or(1.0);
    j["t"] = t;
    j["dt"] = cfg.dt;
    j["eps"] = cfg.eps;
    auto res = simulate_lamperti_marginals(m, x, t, cfg);
    std::size_t ext = 0;
    for (double z : res.zeta) ext += z <= t;
    curve = std::move(res.z_t);
    report(*curve, std::exp(-x * k.u_t(t, lam)));
    j["extinct_fraction"] = static_cast<double>(ext) / static_cast<double>(cfg.n_paths);
    j["extinct_target"] = k.extinction_cdf(x, t);
  } else {
    throw ConfigError("unknown experiment '" + name +
                      "' (near-extinction|fixed-time|reverse|qprocess|yaglom-rescaled|"
                      "transition|lamperti)");
  }

  const std::string text = j.dump(2) + "\n";
  ctx.out << text;
  Csv csv({"x", "cdf"});
  for (const auto& [px, pf] : curve->cdf_points(o.cdf_points)) csv.row({px, pf});
  emit_files(ctx, o, "mc " + name, l.bytes,
             {{"mc_" + name + ".json", text}, {"mc_" + name + "_cdf.csv", csv.str()}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"CB processes conditioned on extinction", "cbcond"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--mech", o.mech, "mechanism config (JSON)");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--n", o.n, "sample size, or number of table rows");
  app.add_option("--out", o.out, "directory for output files and manifest.json");
  app.add_option("--tol", o.tol, "relative tolerance of psi evaluations");
  app.add_option("--workers", o.workers, "Monte Carlo worker threads (0 = all cores)");

  auto* info = app.add_subcommand("info", "classify a mechanism");
  auto* verify = app.add_subcommand("verify", "run the invariant gates");
  auto* phi = app.add_subcommand("phi", "phi(lambda) table");
  auto* varphi = app.add_subcommand("varphi", "varphi(t) table");
  auto* ut = app.add_subcommand("ut", "u_t(lambda) table");
  auto* ext = app.add_subcommand("extinction", "extinction-time cdf and density");
  auto* scale = app.add_subcommand("scale-table", "W, W' and the stationary density");
  auto* pot = app.add_subcommand("potential", "potential density g(x, y) or mass");
  auto* law = app.add_subcommand("law", "limit-law transforms");
  auto* trip = app.add_subcommand("levy-triplet", "Levy density of V_q");
  auto* mc = app.add_subcommand("mc", "Monte Carlo experiments");
  auto* oracle = app.add_subcommand("oracle", "closed-form oracle values");

  for (auto* sc : {phi, ut, law}) {
    sc->add_option("--lambda", o.lambda_list, "comma-separated lambda values");
    sc->add_option("--grid,--lambda-grid", o.grid, "log-spaced grid lo,hi,n");
  }
  for (auto* sc : {varphi, ut, ext}) sc->add_option("--t", o.t_list, "comma-separated times");
  for (auto* sc : {ext, pot}) sc->add_option("--x", o.x, "initial state");
  for (auto* sc : {scale, pot, trip}) {
    sc->add_option("--xmin,--ymin", o.xmin, "grid minimum");
    sc->add_option("--xmax,--ymax", o.xmax, "grid maximum");
    sc->add_flag("--log", o.log_spacing, "log-spaced grid");
  }
  for (auto* sc : {verify, scale, pot, law, trip}) {
    sc->add_flag("--closed-form", o.closed_form, "use registry W when available");
    sc->add_option("--A", o.euler.A, "inversion parameter A");
    sc->add_option("--terms", o.euler.terms, "inversion terms");
    sc->add_option("--euler-terms", o.euler.euler_terms, "Euler averaging terms");
  }
  pot->add_flag("--mass", o.mass, "print E_x[zeta] instead of the density table");
  law->add_option("--kind", o.kind, "qsd|yaglom|mus|ws|vq|vinf");
  law->add_option("--beta", o.beta, "QSD index");
  law->add_option("--s", o.s, "window length s");
  law->add_option("--q", o.q, "lag q");
  trip->add_option("--q", o.q, "lag q");
  mc->add_option("experiment", o.experiment,
                 "near-extinction|fixed-time|reverse|qprocess|yaglom-rescaled|transition|lamperti")
      ->required();
  mc->add_option("--x", o.x, "initial state");
  mc->add_option("--t", o.t, "time");
  mc->add_option("--s", o.s, "window length");
  mc->add_option("--q", o.q, "lag before extinction");
  mc->add_option("--lambda", o.lambda, "Laplace argument of the reported estimate");
  mc->add_option("--dt", o.dt, "Euler step (lamperti)");
  mc->add_option("--eps", o.eps, "small-jump cutoff (lamperti)");
  mc->add_option("--cdf-points", o.cdf_points, "rows of the empirical cdf CSV");
  oracle->add_option("--family", o.family, "stable(beta)|quadratic|linear_plus_quadratic");
  oracle->add_option("--quantity", o.quantity, "psi|psi_prime|phi|varphi|ut|W|Wprime|...");
  oracle->add_option("--args", o.args, "comma-separated arguments");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_out;
    std::ostringstream o_err;
    const int code = app.exit(e, o_out, o_err);
    out << o_out.str();
    err << o_err.str();
    return code == 0 ? kOk : kConfigError;
  }

  Context ctx{out, err, args};
  try {
    if (*info) return cmd_info(ctx, o);
    if (*verify) return cmd_verify(ctx, o);
    if (*phi) return cmd_phi(ctx, o);
    if (*varphi) return cmd_varphi(ctx, o);
    if (*ut) return cmd_ut(ctx, o);
    if (*ext) return cmd_extinction(ctx, o);
    if (*scale) return cmd_scale_table(ctx, o);
    if (*pot) return cmd_potential(ctx, o);
    if (*law) return cmd_law(ctx, o);
    if (*trip) return cmd_levy_triplet(ctx, o);
    if (*mc) return cmd_mc(ctx, o);
    if (*oracle) return cmd_oracle(ctx, o);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kConfigError;
}

}  // namespace cbcond::cli
