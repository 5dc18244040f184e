// annealed_ising: command-line front end for the annealed Ising library.
//
// Every run writes its resolved configuration (including theta, nu_N and
// beta_c,N) ahead of the data: as "# config: {...}" comment lines in CSV, or
// as the "config" member in JSON.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "annealed_ising.hpp"

using nlohmann::json;
using namespace ising;

namespace {

struct Options {
  std::string model = "grg";
  bool homogeneous = false;
  std::optional<std::size_t> n;
  double tau = 4.0;
  double cw = 1.0;
  std::string weights_file;
  std::optional<double> beta;
  std::optional<double> beta_offset;
  std::optional<double> theta;
  double b_field = 0.0;
  double tol = kDefaultFixedPointTol;
  std::uint64_t seed = 1;
  std::size_t samples = 10000;
  std::string output;
  std::string format = "csv";

  // command specific
  std::string sweep = "B";
  double from = 1e-6;
  double to = 1e-3;
  int points = 31;
  bool log_spacing = true;
  std::string exponent = "delta";
  double window_b = 0.0;
  double x_max = 6.0;
  std::string measure = "tilde";
  std::vector<std::size_t> n_list{1000, 10000, 100000, 1000000};
  std::vector<double> z_values{0.5, 1.0, 2.0};
  std::vector<double> r_values{0.5, 1.0};
};

// Table of output rows plus a free-form summary.
struct Report {
  json config;
  json summary = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  bool column_header = true;
};

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string cell(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void write_report(std::ostream& os, const Report& r, const std::string& format) {
  if (format == "json") {
    json j;
    j["config"] = r.config;
    j["summary"] = r.summary;
    j["columns"] = r.columns;
    j["rows"] = r.rows;
    os << j.dump(2) << '\n';
    return;
  }
  os << "# config: " << r.config.dump() << '\n';
  if (!r.summary.empty()) os << "# summary: " << r.summary.dump() << '\n';
  if (r.column_header && !r.columns.empty()) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
    os << '\n';
  }
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << '\n';
  }
}

using MeanFieldLaw = std::variant<WeightSequence, PowerLawLimit>;

class Setup {
 public:
  explicit Setup(const Options& o) : o_(o), kind_(parse_model_kind(o.model)) {
    if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
    if (!(o.tol > 0.0)) throw ConfigError("--tol must be > 0");
    const int given = (o.beta ? 1 : 0) + (o.beta_offset ? 1 : 0) + (o.theta ? 1 : 0);
    if (given > 1) throw ConfigError("give at most one of --beta, --beta-offset, --theta");
    if (o.homogeneous && !o.weights_file.empty()) {
      throw ConfigError("--homogeneous and --weights-file are exclusive");
    }
  }

  ModelKind kind() const { return kind_; }
  const Options& opts() const { return o_; }

  /// Finite weight sequence; n_default applies when --n is absent.
  WeightSequence finite_weights(std::size_t n_default) const {
    if (!o_.weights_file.empty()) {
      std::ifstream in(o_.weights_file);
      if (!in) throw ConfigError("cannot open weights file " + o_.weights_file);
      return read_weights_csv(in);
    }
    const std::size_t n = o_.n.value_or(n_default);
    if (o_.homogeneous) return make_homogeneous_weights(n);
    return make_powerlaw_weights(n, o_.tau, o_.cw);
  }

  /// Finite weights when a finite sequence was asked for, the limiting
  /// power law otherwise.
  MeanFieldLaw mean_field_law() const {
    if (o_.homogeneous || o_.n || !o_.weights_file.empty()) return finite_weights(1);
    return PowerLawLimit(o_.tau, o_.cw);
  }

  static MomentSet moments(const MeanFieldLaw& law) {
    return std::visit([](const auto& l) { return MomentSet(moments_of(l)); }, law);
  }

  /// beta from --theta / --beta / --beta-offset, defaulting to beta_c,N.
  double resolve_beta(const MomentSet& mom) const {
    const double bc = critical_beta(kind_, mom.nu);
    if (o_.theta) return beta_for_coupling(kind_, *o_.theta);
    if (o_.beta) return *o_.beta;
    if (o_.beta_offset) return bc + *o_.beta_offset;
    return bc;
  }

  /// beta_c,N as the inverse of theta = 1/nu_N. Taking theta directly
  /// avoids a round trip through sinh/asinh at the critical point.
  double resolve_theta(const MomentSet& mom) const {
    if (o_.theta) return *o_.theta;
    if (!o_.beta && !o_.beta_offset) return 1.0 / mom.nu;
    return effective_coupling(kind_, resolve_beta(mom));
  }

  json config(const std::string& command, const MomentSet& mom, double beta, double theta) const {
    json c;
    c["command"] = command;
    c["model"] = std::string(to_string(kind_));
    c["homogeneous"] = o_.homogeneous;
    if (!o_.weights_file.empty()) c["weights_file"] = o_.weights_file;
    c["n"] = mom.n == 0 ? json("inf") : json(mom.n);
    if (!o_.homogeneous && o_.weights_file.empty()) {
      c["tau"] = o_.tau;
      c["cw"] = o_.cw;
    }
    c["beta"] = number(beta);
    c["theta"] = number(theta);
    c["nu_N"] = mom.nu;
    c["beta_c_N"] = critical_beta(kind_, mom.nu);
    if (o_.beta_offset) c["beta_offset"] = *o_.beta_offset;
    c["B"] = o_.b_field;
    c["tol"] = o_.tol;
    c["moments"] = to_json(mom);
    return c;
  }

 private:
  const Options& o_;
  ModelKind kind_;
};

std::vector<double> spacing(double from, double to, int points, bool log_spacing) {
  if (points < 2) throw ConfigError("--points must be >= 2");
  if (!(to > from)) throw ConfigError("--to must exceed --from");
  if (log_spacing && !(from > 0.0)) throw ConfigError("log spacing needs --from > 0");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    out[static_cast<std::size_t>(i)] =
        log_spacing ? from * std::pow(to / from, t) : from + (to - from) * t;
  }
  out.back() = to;
  return out;
}

LimitLaw limit_law_from(const Setup& s, const WeightSequence& ws) {
  if (s.opts().homogeneous || ws.power_law() == std::nullopt) {
    return LimitLaw::finite_fourth(empirical_moments(ws));
  }
  return LimitLaw::powerlaw(ws.power_law()->tau);
}

ExponentTable table_from(const LimitLaw& law) {
  return law.regime == Regime::powerlaw ? exponent_table(Regime::powerlaw, law.tau)
                                        : exponent_table(Regime::finite_fourth);
}

// ---------------------------------------------------------------------------

Report cmd_critical_point(const Setup& s) {
  const auto law = s.mean_field_law();
  const auto mom = Setup::moments(law);
  const double bc = critical_beta(s.kind(), mom.nu);
  Report r;
  r.config = s.config("critical-point", mom, bc, 1.0 / mom.nu);
  r.columns = {"quantity", "value"};
  r.rows.push_back({"beta_c_N", bc});
  r.summary["beta_c_N"] = bc;
  if (std::holds_alternative<WeightSequence>(law)) {
    const auto& ws = std::get<WeightSequence>(law);
    if (ws.power_law()) {
      const double limit = critical_beta(s.kind(), limiting_moments(ws.power_law()->tau, ws.power_law()->cw).nu);
      r.rows.push_back({"beta_c", limit});
      r.summary["beta_c"] = limit;
    } else {
      r.rows.push_back({"beta_c", bc});
      r.summary["beta_c"] = bc;
    }
  } else {
    r.rows.push_back({"beta_c", bc});
    r.summary["beta_c"] = bc;
  }
  return r;
}

Report cmd_magnetization_curve(const Setup& s) {
  const auto& o = s.opts();
  const auto law = s.mean_field_law();
  const auto mom = Setup::moments(law);
  const double beta0 = s.resolve_beta(mom);
  Report r;
  r.config = s.config("magnetization-curve", mom, beta0, effective_coupling(s.kind(), beta0));
  r.config["sweep"] = o.sweep;
  r.config["from"] = o.from;
  r.config["to"] = o.to;
  r.config["points"] = o.points;
  r.columns = {"beta", "B", "z_star", "magnetization", "susceptibility"};
  for (double v : spacing(o.from, o.to, o.points, o.log_spacing)) {
    double beta = beta0, B = o.b_field;
    if (o.sweep == "B") {
      B = v;
    } else if (o.sweep == "beta") {
      beta = v;
    } else {
      throw ConfigError("--sweep must be beta or B");
    }
    const ModelSpec spec(s.kind(), beta, B);
    const auto row = std::visit([&](const auto& l) { return curve_row(spec, l, o.tol); }, law);
    r.rows.push_back({row.beta, row.b_field, row.z_star, row.magnetization, number(row.susceptibility)});
  }
  return r;
}

Report cmd_exponent_fit(const Setup& s) {
  const auto& o = s.opts();
  const auto law = s.mean_field_law();
  const auto mom = Setup::moments(law);
  const double bc = critical_beta(s.kind(), mom.nu);

  ExponentTable table;
  if (o.exponent == "delta-log") {
    table = exponent_table(Regime::tau5_logcorrected);
  } else if (std::holds_alternative<PowerLawLimit>(law) && o.tau < 5.0) {
    table = exponent_table(Regime::powerlaw, o.tau);
  } else if (std::holds_alternative<WeightSequence>(law) && std::get<WeightSequence>(law).power_law()) {
    table = exponent_table_for_tau(std::get<WeightSequence>(law).power_law()->tau);
  } else {
    table = exponent_table(Regime::finite_fourth);
  }

  double lo = 1e-4, hi = 1e-2;
  if (o.exponent == "delta" || o.exponent == "delta-log") {
    lo = 1e-6;
    hi = 1e-3;
  } else if (o.exponent == "beta") {
    lo = 1e-5;
  }
  const auto xs = geometric_grid(lo, hi, 8);

  std::vector<FitPoint> pts;
  FitTransform transform;
  double expected = 0.0;
  std::visit(
      [&](const auto& l) {
        if (o.exponent == "delta" || o.exponent == "delta-log") {
          pts = critical_isotherm(s.kind(), l, xs);
          expected = o.exponent == "delta" ? 1.0 / table.delta_exp : 1.0;
          if (o.exponent == "delta-log") transform = FitTransform::logcorrected(1.0 / 3.0);
        } else if (o.exponent == "beta") {
          pts = spontaneous_magnetization(s.kind(), l, xs);
          expected = table.beta_exp;
        } else if (o.exponent == "gamma") {
          pts = zero_field_susceptibility(s.kind(), l, xs, -1);
          expected = -table.gamma_exp;
        } else if (o.exponent == "gamma-prime") {
          pts = zero_field_susceptibility(s.kind(), l, xs, +1);
          expected = -table.gamma_prime_exp;
        } else {
          throw ConfigError("--exponent must be beta, delta, gamma, gamma-prime or delta-log");
        }
      },
      law);
  const auto fit = fit_exponent(pts, transform);
  Report r;
  r.config = s.config("exponent-fit", mom, bc, 1.0 / mom.nu);
  r.config["exponent"] = o.exponent;
  r.summary = fit_report(table, o.exponent, fit, expected);
  r.columns = {"x", "y"};
  for (const auto& p : pts) r.rows.push_back({p.x, number(p.y)});
  return r;
}

Report density_report(const Setup& s, const std::string& command, double b) {
  const auto& o = s.opts();
  LimitLaw law;
  MomentSet mom;
  if (o.homogeneous) {
    mom = empirical_moments(make_homogeneous_weights(1));
    law = LimitLaw::finite_fourth(mom);
  } else if (!o.weights_file.empty()) {
    mom = empirical_moments(s.finite_weights(1));
    law = LimitLaw::finite_fourth(mom);
  } else {
    mom = limiting_moments(o.tau, o.cw);
    law = LimitLaw::powerlaw(o.tau);
  }
  law = law.with_window(b, window_coefficient(s.kind(), mom));
  const auto xs = spacing(-o.x_max, o.x_max, o.points, false);
  const auto rows = tabulate_density(law, xs);
  Report r;
  r.config = s.config(command, mom, critical_beta(s.kind(), mom.nu), 1.0 / mom.nu);
  r.config["window_b"] = b;
  r.config["window_coefficient"] = law.window_coefficient;
  r.config["regime"] = std::string(to_string(law.regime));
  r.summary["normalizer"] = density_normalizer(law);
  r.summary["C"] = limit_constant_C(law);
  r.columns = {"x", "f", "unnormalized_density", "normalized_density"};
  for (const auto& row : rows) r.rows.push_back({row.x, row.f, row.unnormalized, row.normalized});
  return r;
}

Report cmd_clt_check(const Setup& s) {
  const auto& o = s.opts();
  const auto ws = s.finite_weights(1'000'000);
  const auto mom = empirical_moments(ws);
  const double theta = s.resolve_theta(mom);
  const auto law = limit_law_from(s, ws);
  const auto table = table_from(law);
  const GnFunction gn(ws, theta, table.lambda);
  Report r;
  r.config = s.config("clt-check", mom, beta_for_coupling(s.kind(), theta), theta);
  r.config["lambda"] = table.lambda;
  r.config["regime"] = std::string(to_string(law.regime));
  r.columns = {"kind", "arg", "finite_N", "limit"};
  for (double z : o.z_values) {
    const auto c = gn_limit_check(gn, z, 0.0, law, table);
    r.rows.push_back({"gn", z, c.lhs, c.rhs});
  }
  for (double rr : o.r_values) {
    r.rows.push_back({"mgf", rr, mgf_ratio(rr, gn), limiting_mgf(rr, law)});
  }
  return r;
}

Report cmd_sample(const Setup& s) {
  const auto& o = s.opts();
  const auto ws = s.finite_weights(1000);
  const auto mom = empirical_moments(ws);
  const double theta = s.resolve_theta(mom);
  if (o.b_field != 0.0) throw ConfigError("sampling is available at B = 0 only");
  const auto spec = ModelSpec::from_coupling(ModelKind::rank_one_icw, theta);
  const auto draws = ExactSampler(ws, spec).sample(o.samples, o.seed);
  Report r;
  r.config = s.config("sample", mom, beta_for_coupling(s.kind(), theta), theta);
  r.config["seed"] = o.seed;
  r.config["samples"] = o.samples;
  r.config["measure"] = "tilde";
  r.columns = {"S_N"};
  r.column_header = false;
  for (long v : draws) r.rows.push_back({v});
  return r;
}

Report cmd_enumerate(const Setup& s) {
  const auto& o = s.opts();
  const auto ws = s.finite_weights(10);
  const auto mom = empirical_moments(ws);
  const double beta = s.resolve_beta(mom);
  const ModelSpec spec = o.theta ? ModelSpec::from_coupling(s.kind(), *o.theta, o.b_field)
                                 : ModelSpec(s.kind(), beta, o.b_field);
  const Measure measure = parse_measure(o.measure);
  const auto tilde = enumerate_spin_law(ws, spec, Measure::tilde);
  const auto exact = enumerate_spin_law(ws, spec, Measure::exact);
  const auto& shown = measure == Measure::tilde ? tilde : exact;
  Report r;
  r.config = s.config("enumerate", mom, spec.beta(), spec.theta());
  r.config["measure"] = o.measure;
  r.summary["total_variation_exact_tilde"] = total_variation(exact, tilde);
  r.summary["log_z"] = shown.log_z;
  r.columns = {"s", "probability"};
  for (std::size_t k = 0; k <= shown.n; ++k) r.rows.push_back({shown.spin_at(k), shown.prob[k]});
  return r;
}

Report cmd_partition(const Setup& s) {
  const auto& o = s.opts();
  Report r;
  r.columns = {"n", "theta", "log_Z", "offset_quoted", "offset_jacobian", "diff_quoted", "diff_jacobian"};
  std::optional<double> prev_q, prev_j;
  MomentSet first_mom;
  double first_theta = 0.0;
  for (std::size_t n : o.n_list) {
    Options local = o;
    local.n = n;
    Setup sn(local);
    const auto ws = sn.finite_weights(n);
    const auto mom = empirical_moments(ws);
    const double theta = sn.resolve_theta(mom);
    const auto table = table_from(limit_law_from(sn, ws));
    const GnFunction gn(ws, theta, table.lambda);
    const double lz = log_partition(gn);
    const double base = lz - static_cast<double>(n) * std::numbers::ln2;
    const double q = base - quoted_partition_exponent(table.delta_exp) * std::log(static_cast<double>(n));
    const double j = base - jacobian_partition_exponent(table.delta_exp) * std::log(static_cast<double>(n));
    r.rows.push_back({n, theta, lz, q, j, prev_q ? json(q - *prev_q) : json("nan"),
                      prev_j ? json(j - *prev_j) : json("nan")});
    if (!prev_q) {
      first_mom = mom;
      first_theta = theta;
    }
    prev_q = q;
    prev_j = j;
  }
  r.config = s.config("partition", first_mom, beta_for_coupling(s.kind(), first_theta), first_theta);
  r.config["n_list"] = o.n_list;
  r.summary["A_estimate_jacobian"] = prev_j ? number(*prev_j) : json("nan");
  r.summary["A_estimate_quoted"] = prev_q ? number(*prev_q) : json("nan");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Annealed Ising models on generalized random graphs: mean-field criticality and critical limit laws"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* c) {
    c->add_option("--model", o.model, "grg (annealed generalized random graph) or icw (rank-1 Curie-Weiss)");
    c->add_flag("--homogeneous", o.homogeneous, "use w_i = 1 for every vertex");
    c->add_option("--n", o.n, "number of vertices");
    c->add_option("--tau", o.tau, "power-law exponent of the weights");
    c->add_option("--cw", o.cw, "weight scale");
    c->add_option("--weights-file", o.weights_file, "CSV with header i,w");
    c->add_option("--beta", o.beta, "inverse temperature");
    c->add_option("--beta-offset", o.beta_offset, "beta = beta_c,N + offset");
    c->add_option("--theta", o.theta, "effective coupling (sinh(beta) on the GRG, beta on the ICW)");
    c->add_option("--B", o.b_field, "external field");
    c->add_option("--tol", o.tol, "fixed-point tolerance");
    c->add_option("--output", o.output, "output file (default: stdout)");
    c->add_option("--format", o.format, "csv or json");
  };

  auto* cp = app.add_subcommand("critical-point", "beta_c and beta_c,N");
  common(cp);
  auto* mc = app.add_subcommand("magnetization-curve", "M and chi along a sweep in beta or B");
  common(mc);
  mc->add_option("--sweep", o.sweep, "beta or B");
  mc->add_option("--from", o.from, "first value of the swept parameter");
  mc->add_option("--to", o.to, "last value of the swept parameter");
  mc->add_option("--points", o.points, "number of sweep points");
  mc->add_flag("!--linear", o.log_spacing, "linear instead of logarithmic spacing");
  auto* ef = app.add_subcommand("exponent-fit", "log-log fit of a critical exponent");
  common(ef);
  ef->add_option("--exponent", o.exponent, "beta, delta, gamma, gamma-prime or delta-log");
  auto* cd = app.add_subcommand("clt-density", "limit density f, normalizer and C");
  common(cd);
  cd->add_option("--x-max", o.x_max);
  cd->add_option("--points", o.points);
  cd->add_option("--b", o.window_b, "scaling-window parameter");
  auto* cc = app.add_subcommand("clt-check", "finite-N G_N and MGF against their limits");
  common(cc);
  cc->add_option("--z", o.z_values, "scaled points z, comma separated")->delimiter(',');
  cc->add_option("--r", o.r_values, "MGF arguments r, comma separated")->delimiter(',');
  auto* sa = app.add_subcommand("sample", "exact samples of S_N");
  common(sa);
  sa->add_option("--samples", o.samples);
  sa->add_option("--seed", o.seed);
  auto* en = app.add_subcommand("enumerate", "law of S_N by full enumeration");
  common(en);
  en->add_option("--measure", o.measure, "tilde or exact");
  auto* pa = app.add_subcommand("partition", "log Z~_N over a list of sizes");
  common(pa);
  pa->add_option("--n-list", o.n_list, "sizes N, comma separated")->delimiter(',');
  auto* wi = app.add_subcommand("window", "scaling-window density table");
  common(wi);
  wi->add_option("--b", o.window_b, "scaling-window parameter");
  wi->add_option("--x-max", o.x_max);
  wi->add_option("--points", o.points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (o.points == 31 && (cd->parsed() || wi->parsed())) o.points = 121;
    Setup setup(o);
    Report report;
    if (cp->parsed()) report = cmd_critical_point(setup);
    if (mc->parsed()) report = cmd_magnetization_curve(setup);
    if (ef->parsed()) report = cmd_exponent_fit(setup);
    if (cd->parsed()) report = density_report(setup, "clt-density", o.window_b);
    if (cc->parsed()) report = cmd_clt_check(setup);
    if (sa->parsed()) report = cmd_sample(setup);
    if (en->parsed()) report = cmd_enumerate(setup);
    if (pa->parsed()) report = cmd_partition(setup);
    if (wi->parsed()) report = density_report(setup, "window", o.window_b);

    if (o.output.empty()) {
      write_report(std::cout, report, o.format);
    } else {
      std::ofstream out(o.output);
      if (!out) throw ConfigError("cannot open output file " + o.output);
      write_report(out, report, o.format);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (tolerance " << e.tolerance() << ")\n";
    return 3;
  }
  return 0;
}
