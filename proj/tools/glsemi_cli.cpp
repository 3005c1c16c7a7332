#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <glsemi/glsemi.hpp>

namespace {

using nlohmann::json;
using namespace glsemi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string model = "model-j";
  std::string precision = "double";
  std::uint64_t seed = 20261016;
};

// A path to a JSON file, or one of the built-in names model-c / model-j.
LevyQuadruplet resolve_model(const std::string& spec) {
  if (spec == "model-c" || spec == "MODEL-C") return acceptance::model_c();
  if (spec == "model-j" || spec == "MODEL-J") return acceptance::model_j();
  return load_model(spec);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

template <typename Real>
json poly_json(const Poly<Real>& p) {
  json a = json::array();
  for (int k = 0; k <= p.degree(); ++k) a.push_back(static_cast<double>(p.value_of(k)));
  return a;
}

void print_number(double v) { std::cout << std::setprecision(17) << v << "\n"; }

struct Options {
  // moments
  std::string kind = "V_psi";
  int n = 0;
  int upto = -1;
  // wphi
  double re = 1, im = 0;
  // density
  double x_min = 0.1, x_max = 10;
  int points = 50;
  // eigen / apply / verify
  bool dag = false;
  std::string coefs = "1";
  double t = 1;
  std::string semigroup = "P";
  int degree = 10, count = 5;
  std::string times = "0.1,1,5";
  double tol = 1e-10;
  // phi / krein
  std::string tag = "X_laguerre";
  std::optional<double> theta;
  std::string q = "1";
  double q_min = 0, q_max = 0;
  int atoms = 20;
  // simulate
  std::string observable = "killed";
  double x = 1, q_sim = 1, dt = 1e-3, eps = 1e-10, horizon = 50, burn_in = 5;
  int k = 2;
  long replicas = 10000;
  int threads = 0;
  // acceptance
  std::vector<int> only;
  long mc_replicas = 100000;
};

template <typename Real>
int cmd_inspect(const Globals& g) {
  const PsiModel<Real> m(resolve_model(g.model));
  const auto& f = m.flags();
  json out{{"theta", static_cast<double>(m.theta())},
           {"flags", {{"N_up", f.n_up}, {"N_check", f.n_check}, {"N_P", f.n_p}, {"Nbar_inf", f.nbar_inf}}}};
  out["frakb"] = m.frakb() ? json(static_cast<double>(*m.frakb())) : json(nullptr);
  std::cout << out.dump() << "\n";
  return 0;
}

template <typename Real>
int cmd_moments(const Globals& g, const Options& o) {
  const PsiModel<Real> m(resolve_model(g.model));
  MomentTable<Real> table(m, moment_kind_from_string(o.kind));
  if (o.upto < 0) {
    print_number(static_cast<double>(table.value(o.n)));
    return 0;
  }
  std::cout << "n,log_moment\n" << std::setprecision(17);
  for (int n = 0; n <= o.upto; ++n) std::cout << n << "," << static_cast<double>(table.at(n).log_abs) << "\n";
  return 0;
}

template <typename Real>
int cmd_wphi(const Globals& g, const Options& o) {
  const PsiModel<Real> m(resolve_model(g.model));
  WphiEvaluator<Real> w(m);
  const auto v = w(std::complex<Real>(Real(o.re), Real(o.im)));
  const auto val = v.value();
  std::cout << json{{"re", static_cast<double>(val.real())},
                    {"im", static_cast<double>(val.imag())},
                    {"log_re", static_cast<double>(v.log_value.real())},
                    {"log_im", static_cast<double>(v.log_value.imag())},
                    {"residual", static_cast<double>(v.residual)}}
                   .dump()
            << "\n";
  return 0;
}

template <typename Real>
int cmd_density(const Globals& g, const Options& o) {
  if (!(o.x_min > 0) || o.x_max < o.x_min || o.points < 1) throw UsageError("need 0 < x-min <= x-max, points >= 1");
  const PsiModel<Real> m(resolve_model(g.model));
  const DensityInverter<Real> inv(m);
  std::cout << "x,density,err\n" << std::setprecision(17);
  for (int i = 0; i < o.points; ++i) {
    const double x = o.points == 1 ? o.x_min : o.x_min * std::pow(o.x_max / o.x_min, double(i) / (o.points - 1));
    const auto d = inv(Real(x));
    std::cout << x << "," << static_cast<double>(d.value) << "," << static_cast<double>(d.err) << "\n";
  }
  return 0;
}

template <typename Real>
int cmd_eigen(const Globals& g, const Options& o) {
  const PsiModel<Real> m(resolve_model(g.model));
  const SpectralModel<Real> s(m, std::max(o.n + 1, 2));
  json out{{"n", o.n}, {"dag", o.dag}};
  if (o.dag) {
    const auto p = s.eigenpoly_dag(o.n);
    out["x_power"] = static_cast<double>(p.theta);
    out["coefficients"] = poly_json(p.q);
  } else {
    out["x_power"] = 0.0;
    out["coefficients"] = poly_json(s.eigenpoly(o.n));
  }
  std::cout << out.dump() << "\n";
  return 0;
}

SemigroupKind semigroup_from_string(const std::string& s) {
  if (s == "P") return SemigroupKind::P;
  if (s == "P_dag") return SemigroupKind::P_dag;
  if (s == "Q") return SemigroupKind::Q;
  if (s == "Q_dag") return SemigroupKind::Q_dag;
  throw UsageError("semigroup must be one of P, P_dag, Q, Q_dag");
}

template <typename Real>
int cmd_apply(const Globals& g, const Options& o) {
  const PsiModel<Real> m(resolve_model(g.model));
  const SpectralModel<Real> s(m);
  std::vector<Real> c;
  for (double v : parse_list(o.coefs)) c.push_back(Real(v));
  const Poly<Real> f = Poly<Real>::from_values(c);
  const SemigroupKind kind = semigroup_from_string(o.semigroup);
  json out{{"semigroup", o.semigroup}, {"t", o.t}, {"before", poly_json(f)}};
  if (kind == SemigroupKind::P || kind == SemigroupKind::Q) {
    const Poly<Real> after = s.apply(f, Real(o.t), kind);
    out["after"] = poly_json(after);
    out["x_power"] = 0.0;
    if (kind == SemigroupKind::P) {
      out["norm_before"] = static_cast<double>(s.norm_m(f));
      out["norm_after"] = static_cast<double>(s.norm_m(after));
    }
  } else {
    const auto after = s.apply(ThetaShiftedPoly<Real>{f, m.theta()}, Real(o.t), kind);
    out["after"] = poly_json(after.q);
    out["x_power"] = static_cast<double>(m.theta());
  }
  std::cout << out.dump() << "\n";
  return 0;
}

template <typename Real>
int cmd_verify(const Globals& g, const Options& o) {
  const PsiModel<Real> m(resolve_model(g.model));
  const SpectralModel<Real> s(m);
  const Intertwiner<Real> lam(s);
  const auto times = parse_list(o.times);
  const auto polys = acceptance::random_polys<Real>(o.count, o.degree, g.seed);
  double worst = 0;
  std::cout << "model,f,t,variant,deviation\n";
  for (std::size_t i = 0; i < polys.size(); ++i)
    for (double t : times)
      for (const char* variant : {"plain", "killed"}) {
        const Real d = std::string(variant) == "plain"
                           ? lam.verify(polys[i], Real(t))
                           : lam.verify(ThetaShiftedPoly<Real>{polys[i], m.theta()}, Real(t));
        worst = std::max(worst, static_cast<double>(d));
        std::cout << g.model << ",f" << i << "," << t << "," << variant << "," << std::setprecision(3)
                  << static_cast<double>(d) << "\n";
      }
  return worst <= o.tol ? 0 : 1;
}

template <typename Real>
int cmd_phi(const Globals& g, const Options& o) {
  const SubordinatorTag tag = subordinator_tag_from_string(o.tag);
  std::optional<SubordinatorExponent<Real>> phi;
  if (o.theta && tag != SubordinatorTag::tilde_X) {
    phi = SubordinatorExponent<Real>::make(tag, Real(*o.theta));
  } else {
    const PsiModel<Real> m(resolve_model(g.model));
    phi = SubordinatorExponent<Real>::for_model(tag, m);
  }
  if (o.q_max > 0) {
    if (!(o.q_min > 0) || o.q_max < o.q_min || o.points < 1) throw UsageError("need 0 < q-min <= q-max");
    std::cout << "q,phi\n" << std::setprecision(17);
    for (int i = 0; i < o.points; ++i) {
      const double q = o.points == 1 ? o.q_min : o.q_min * std::pow(o.q_max / o.q_min, double(i) / (o.points - 1));
      std::cout << q << "," << static_cast<double>((*phi)(Real(q))) << "\n";
    }
    return 0;
  }
  const auto qs = parse_list(o.q);
  if (qs.size() == 1) {
    print_number(static_cast<double>((*phi)(Real(qs[0]))));
    return 0;
  }
  std::cout << "q,phi\n" << std::setprecision(17);
  for (double q : qs) std::cout << q << "," << static_cast<double>((*phi)(Real(q))) << "\n";
  return 0;
}

template <typename Real>
int cmd_krein(const Globals& g, const Options& o) {
  const Real theta = o.theta ? Real(*o.theta) : PsiModel<Real>(resolve_model(g.model)).theta();
  std::cout << "location,weight\n" << std::setprecision(17);
  for (const auto& a : krein_atoms<Real>(theta, o.atoms))
    std::cout << static_cast<double>(a.location) << "," << static_cast<double>(a.weight) << "\n";
  return 0;
}

int cmd_simulate(const Globals& g, const Options& o) {
  const LevyQuadruplet quad = resolve_model(g.model);
  const PsiModel<double> m(quad);
  PathConfig cfg;
  cfg.dt = o.dt;
  cfg.eps_absorb = o.eps;
  cfg.seed = g.seed;
  cfg.replicas = o.replicas;
  cfg.threads = o.threads;
  Observable obs;
  json echo{{"model", to_json(quad)}, {"observable", o.observable}, {"dt", o.dt}, {"eps", o.eps},
            {"replicas", o.replicas}, {"seed", g.seed}, {"threads", o.threads}};
  if (o.observable == "killed") {
    // E_x[X_t^theta; t < T_0]
    obs = KilledSemigroup{ThetaShiftedPoly<double>{Poly<double>::from_values({1.0}), m.theta()}, o.x, o.t};
    cfg.horizon = o.t;
    echo["x"] = o.x;
    echo["t"] = o.t;
  } else if (o.observable == "hitting") {
    obs = HittingLaplace{o.q_sim, o.x};
    echo["x"] = o.x;
    echo["q"] = o.q_sim;
  } else if (o.observable == "stationary") {
    obs = StationaryMoment{o.k, o.burn_in, o.x};
    cfg.horizon = o.horizon;
    echo["k"] = o.k;
    echo["horizon"] = o.horizon;
    echo["burn_in"] = o.burn_in;
  } else if (o.observable == "classical_hitting") {
    obs = ClassicalHittingLaplace{static_cast<double>(m.theta()), o.q_sim, o.x};
    echo["x"] = o.x;
    echo["q"] = o.q_sim;
  } else {
    throw UsageError("observable must be one of killed, hitting, stationary, classical_hitting");
  }
  const Estimate e = estimate(quad, obs, cfg);
  std::cout << json{{"value", e.value}, {"stderr", e.stderr_}, {"config", echo}}.dump() << "\n";
  return 0;
}

int cmd_acceptance(const Globals& g, const Options& o) {
  AcceptanceOptions a;
  a.seed = g.seed;
  a.threads = o.threads;
  a.mc_replicas = o.mc_replicas;
  a.only = o.only;
  auto print = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
  const auto results = g.precision == "extended" ? run_acceptance<long double>(a, print)
                                                 : run_acceptance<double>(a, print);
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}

template <typename Real>
int dispatch(const std::string& name, const Globals& g, const Options& o) {
  if (name == "inspect") return cmd_inspect<Real>(g);
  if (name == "moments") return cmd_moments<Real>(g, o);
  if (name == "wphi") return cmd_wphi<Real>(g, o);
  if (name == "density") return cmd_density<Real>(g, o);
  if (name == "eigen") return cmd_eigen<Real>(g, o);
  if (name == "apply") return cmd_apply<Real>(g, o);
  if (name == "verify") return cmd_verify<Real>(g, o);
  if (name == "phi") return cmd_phi<Real>(g, o);
  if (name == "krein") return cmd_krein<Real>(g, o);
  if (name == "simulate") return cmd_simulate(g, o);
  return cmd_acceptance(g, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Laguerre semigroups: spectral, intertwining and Monte Carlo tools"};
  app.require_subcommand(1);
  Globals g;
  Options o;
  app.add_option("--model", g.model, "model JSON file, or model-c / model-j")->capture_default_str();
  app.add_option("--precision", g.precision, "arithmetic")
      ->check(CLI::IsMember({"double", "extended"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.fallthrough();

  app.add_subcommand("inspect", "theta, class flags and frakb of the model");

  auto* moments = app.add_subcommand("moments", "moment M(n+1) of a named law");
  moments->add_option("--kind", o.kind, "V_psi, I_phi, V_t1psi, m_up or gamma")
      ->check(CLI::IsMember({"V_psi", "I_phi", "V_t1psi", "m_up", "gamma"}))
      ->capture_default_str();
  moments->add_option("--n", o.n, "index n >= 0")->check(CLI::NonNegativeNumber);
  moments->add_option("--upto", o.upto, "emit log moments for n = 0..upto as CSV");

  auto* wphi = app.add_subcommand("wphi", "W_phi(z) with its functional-equation residual");
  wphi->add_option("--re", o.re, "real part of z");
  wphi->add_option("--im", o.im, "imaginary part of z");

  auto* density = app.add_subcommand("density", "invariant density on a log grid (CSV)");
  density->add_option("--x-min", o.x_min);
  density->add_option("--x-max", o.x_max);
  density->add_option("--points", o.points);

  auto* eigen = app.add_subcommand("eigen", "coefficients of an eigenpolynomial (JSON)");
  eigen->add_option("--n", o.n, "degree")->check(CLI::Range(0, 30));
  eigen->add_flag("--dag", o.dag, "killed-process eigenfunction");

  auto* apply = app.add_subcommand("apply", "apply a semigroup to a polynomial (JSON)");
  apply->add_option("--coefs", o.coefs, "comma-separated coefficients, constant term first");
  apply->add_option("--t", o.t)->check(CLI::NonNegativeNumber);
  apply->add_option("--semigroup", o.semigroup, "P, P_dag, Q or Q_dag");

  auto* verify = app.add_subcommand("verify", "intertwining deviation table on random polynomials");
  verify->add_option("--degree", o.degree)->check(CLI::Range(0, 20));
  verify->add_option("--count", o.count)->check(CLI::PositiveNumber);
  verify->add_option("--times", o.times, "comma-separated times");
  verify->add_option("--tol", o.tol, "exit 1 if any deviation exceeds this");

  auto* phi = app.add_subcommand("phi", "Laplace exponent of an inverse local time");
  phi->add_option("--tag", o.tag, "X_laguerre, Xbar_selfsimilar, tilde_X or tilde_Y");
  phi->add_option("--theta", o.theta, "theta in (0, 1); defaults to the model's");
  phi->add_option("--q", o.q, "argument(s), comma-separated");
  phi->add_option("--q-min", o.q_min);
  phi->add_option("--q-max", o.q_max, "with --q-min, emit a log grid as CSV");
  phi->add_option("--points", o.points);

  auto* krein = app.add_subcommand("krein", "atoms of the Krein spectral measure (CSV)");
  krein->add_option("--theta", o.theta, "theta in (0, 1); defaults to the model's");
  krein->add_option("--atoms", o.atoms, "largest atom index")->check(CLI::NonNegativeNumber);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of an observable (JSON)");
  simulate->add_option("--observable", o.observable, "killed, hitting, stationary or classical_hitting");
  simulate->add_option("--t", o.t, "time (killed)");
  simulate->add_option("--x", o.x, "starting point");
  simulate->add_option("--q", o.q_sim, "Laplace argument (hitting)");
  simulate->add_option("--k", o.k, "moment order (stationary)");
  simulate->add_option("--horizon", o.horizon, "time horizon (stationary)");
  simulate->add_option("--burn-in", o.burn_in, "discarded initial time (stationary)");
  simulate->add_option("--dt", o.dt)->check(CLI::PositiveNumber);
  simulate->add_option("--eps", o.eps, "absorption level")->check(CLI::PositiveNumber);
  simulate->add_option("--replicas", o.replicas)->check(CLI::PositiveNumber);
  simulate->add_option("--threads", o.threads, "0 = all hardware threads");

  auto* acc = app.add_subcommand("acceptance", "run the acceptance suite");
  acc->add_option("--only", o.only, "criteria to run");
  acc->add_option("--replicas", o.mc_replicas, "Monte Carlo replicas for criterion 12");
  acc->add_option("--threads", o.threads, "0 = all hardware threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return g.precision == "extended" ? dispatch<long double>(name, g, o) : dispatch<double>(name, g, o);
  } catch (const ModelParseError& e) {
    std::cerr << "model error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    if (!e.field.empty()) std::cerr << " [" << e.field << "]";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
