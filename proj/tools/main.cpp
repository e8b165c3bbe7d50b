// Command-line front door: seeded experiment sweeps, SOS feasibility checks,
// certificate generation, the sample-complexity demonstration, and the
// sampling non-negativity tester.  All randomness flows from explicit seeds;
// every effective parameter is echoed into the output header.
//
// Exit codes: 0 success, 1 NO verdict / contradiction (still valid output),
// 2 usage or input error, 3 numerical failure.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sostest/interp.hpp"
#include "sostest/json_io.hpp"
#include "sostest/pseudo.hpp"
#include "sostest/sos.hpp"
#include "sostest/testers.hpp"

namespace {

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Shortest round-trip decimal formatting, identical across runs.
std::string fmt(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw sostest::SchemaError("cannot write output path " + out_path);
  out << text;
}

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out;
  double tol_eval = 1e-6;
  double tol_psd = 1e-8;
  int max_iter = 100000;
  std::string format = "csv";
};

sostest::Tolerances tolerances(const GlobalOpts& g) {
  sostest::Tolerances t;
  t.eval_tol = g.tol_eval;
  t.psd_tol = g.tol_psd;
  return t;
}

// ---------------------------------------------------------------------------
// interp-sweep
// ---------------------------------------------------------------------------

struct SweepOpts {
  std::vector<int> ns;
  int m = 0;
  double m_exp = 0.0;
  int d = 2;
  std::vector<std::uint64_t> seeds;
  std::string values = "unit";  // unit | ones
  bool no_gsq = false;
};

int run_interp_sweep(const GlobalOpts& g, const SweepOpts& o) {
  using namespace sostest;
  std::vector<std::uint64_t> seeds = o.seeds.empty() ? std::vector<std::uint64_t>{g.seed}
                                                     : o.seeds;
  struct Row {
    std::uint64_t seed;
    int n, m, d;
    InterpolationResult r;
  };
  std::vector<Row> rows;
  for (int n : o.ns) {
    int m = o.m_exp > 0.0 ? static_cast<int>(std::floor(std::pow(double(n), o.m_exp))) : o.m;
    for (std::uint64_t seed : seeds) {
      if (m == 0) continue;
      SampleSet s = sample_gaussian(n, m, seed);
      Eigen::VectorXd v(m);
      if (o.values == "ones") {
        v.setOnes();
      } else {
        SplitMix64 vg = SplitMix64::stream(seed ^ 0x76616c75ULL, 0);
        for (int i = 0; i < m; ++i) v(i) = inverse_normal_cdf(vg.next_double());
        v.normalize();
      }
      auto r = interpolate(s, v, o.d, {.with_gsq = !o.no_gsq});
      rows.push_back({seed, n, m, o.d, std::move(r)});
    }
  }

  std::ostringstream text;
  std::string mspec = o.m_exp > 0.0 ? "n^" + fmt(o.m_exp) : std::to_string(o.m);
  if (g.format == "json") {
    Json out;
    out["config"] = {{"n", o.ns}, {"m", mspec}, {"d", o.d}, {"seeds", seeds},
                     {"values", o.values}, {"gsq", !o.no_gsq}};
    out["rows"] = Json::array();
    for (const auto& row : rows)
      out["rows"].push_back({{"seed", row.seed}, {"n", row.n}, {"m", row.m}, {"d", row.d},
                             {"C", row.r.C}, {"M_dev", row.r.M_dev},
                             {"H_norm", row.r.H_norm}, {"g_norm", row.r.g_norm},
                             {"gsq_norm", row.r.gsq_norm}, {"residual", row.r.residual}});
    text << out.dump(2) << "\n";
  } else {
    text << "# command=interp-sweep d=" << o.d << " m=" << mspec << " values=" << o.values
         << " gsq=" << (o.no_gsq ? "0" : "1") << "\n";
    text << "seed,n,m,d,C,M_dev,H_norm,g_norm,gsq_norm,residual\n";
    for (const auto& row : rows)
      text << row.seed << "," << row.n << "," << row.m << "," << row.d << "," << fmt(row.r.C)
           << "," << fmt(row.r.M_dev) << "," << fmt(row.r.H_norm) << "," << fmt(row.r.g_norm)
           << "," << fmt(row.r.gsq_norm) << "," << fmt(row.r.residual) << "\n";
  }
  write_text(text.str(), g.out);
  return kExitYes;
}

// ---------------------------------------------------------------------------
// sos-check
// ---------------------------------------------------------------------------

struct SosCheckOpts {
  std::string input;
  int half_degree = 0;  // 0 = derive from the target degree
  double norm_bound = -1.0;  // <0 = default per mode
};

int run_sos_check(const GlobalOpts& g, const SosCheckOpts& o) {
  using namespace sostest;
  Json in = load_json(o.input);
  Json out;
  out["config"] = {{"input", o.input}, {"tol_eval", g.tol_eval}, {"tol_psd", g.tol_psd},
                   {"max_iter", g.max_iter}};

  FeasibilityProblem prob;
  prob.tol = tolerances(g);
  prob.max_iterations = g.max_iter;

  if (in.contains("points")) {
    // sample file: { "n": int, "points": [[...]...], "values": [...] }
    if (!in.contains("n") || !in.contains("values"))
      throw SchemaError("sample file: expected keys n, points, values");
    prob.n = in.at("n").get<int>();
    const auto& pts = in.at("points");
    const auto& vals = in.at("values");
    if (pts.size() != vals.size() || pts.empty())
      throw SchemaError("sample file: points/values must be nonempty and match");
    std::vector<std::pair<Eigen::VectorXd, double>> samples;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (static_cast<int>(pts[i].size()) != prob.n)
        throw SchemaError("sample file: point dimension mismatch");
      Eigen::VectorXd p(prob.n);
      for (int j = 0; j < prob.n; ++j) p(j) = pts[i][j].get<double>();
      samples.push_back({p, vals[i].get<double>()});
    }
    if (o.half_degree <= 0) throw SchemaError("sample mode requires --half-degree");
    double bound = o.norm_bound < 0 ? 1.0 : o.norm_bound;
    auto verdict = sos_tester(samples, o.half_degree, bound, prob.tol, g.max_iter);
    out["verdict"] = to_json(verdict);
    write_text(out.dump(2) + "\n", g.out);
    return verdict.yes ? kExitYes : kExitNo;
  }

  auto file = poly_from_json(in);
  auto target = file.as_monomial();
  if (target.terms.empty()) throw SchemaError("sos-check: empty polynomial");
  prob.n = target.n;
  prob.half_degree = o.half_degree > 0 ? o.half_degree : (target.degree() + 1) / 2;
  prob.target = target;
  if (o.norm_bound >= 0) prob.norm_bound = o.norm_bound;
  auto res = feasibility_search(prob);
  out["verdict"] = res.report.feasible ? "YES" : "NO";
  out["report"] = to_json(res.report);
  if (res.report.feasible) {
    out["gram"] = to_json(*res.gram);
    Json squares = Json::array();
    for (const auto& gk : extract_squares(*res.gram, 10 * g.tol_psd))
      squares.push_back(to_json(gk));
    out["squares"] = squares;
  }
  write_text(out.dump(2) + "\n", g.out);
  return res.report.feasible ? kExitYes : kExitNo;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

struct CertifyOpts {
  std::string family;
  int r = 2;
  double c = 0.0;
  std::string k;     // optional "num/den^(1/root)" override, default (2+c)^(1/r)
  double nu = -1.0;  // optional override of the normalization exponent
  int n = 16;
  int m = 40;
  int half_degree = 4;
};

int run_certify(const GlobalOpts& g, const CertifyOpts& o) {
  using namespace sostest;
  Json out;
  if (o.family == "motzkin") {
    if (o.r < 2 || o.r % 2 != 0) {
      std::cerr << "certify: r must be even and >= 2\n";
      return kExitUsage;
    }
    Rational nu = o.nu >= 0 ? Rational(o.nu) : MotzkinPE::default_nu(o.r);
    MotzkinPE pe = o.k.empty()
                       ? MotzkinPE(o.r, o.c, Rational(2) + Rational(o.c), o.r, nu)
                       : MotzkinPE(o.r, o.c, Rational(o.k), 1, nu);
    auto f = motzkin_polynomial(o.r, o.c);
    out["certificate"] = certificate_to_json(pe);
    auto ef = pe_apply(pe, f);
    out["ef"] = ef.is_rational() ? Json(static_cast<double>(ef.to_rational()))
                                 : Json(ef.log2_double());
    auto psd = psd_check(moment_matrix(pe), g.tol_psd);
    out["psd"] = to_json(psd);
    if (ef.sign() >= 0) {
      out["error"] = "certificate does not refute f";
      write_text(out.dump(2) + "\n", g.out);
      return kExitNo;
    }
    auto dist = distance_lower_bound(pe, f);
    out["distance"] = to_json(dist);
    write_text(out.dump(2) + "\n", g.out);
    return psd.pass ? kExitYes : kExitNo;
  }
  if (o.family == "xor") {
    auto eqs = xor_instance(o.n, o.m, g.seed);
    auto cl = xor_closure(eqs, 2 * o.half_degree);
    if (cl.contradiction) {
      Json conflict = Json::array();
      for (int v = 0; v < o.n; ++v)
        if (cl.conflict_mask & (1ull << v)) conflict.push_back(v + 1);
      out["contradiction"] = true;
      out["conflict_vars"] = conflict;
      write_text(out.dump(2) + "\n", g.out);
      return kExitNo;
    }
    XorPE pe(cl, o.half_degree);
    auto p = xor_polynomial(eqs, o.n);
    out["certificate"] = certificate_to_json(pe, eqs, o.n);
    auto ep = pe_apply(pe, p);
    out["ep"] = ep.is_rational() ? Json(static_cast<double>(ep.to_rational())) : Json();
    auto psd = psd_check(moment_matrix(pe, o.n), g.tol_psd);
    out["psd"] = to_json(psd);
    out["distance"] = to_json(distance_lower_bound(pe, p, o.n));
    write_text(out.dump(2) + "\n", g.out);
    return psd.pass ? kExitYes : kExitNo;
  }
  std::cerr << "certify: unknown family '" << o.family << "'\n";
  return kExitUsage;
}

// ---------------------------------------------------------------------------
// lowerbound-demo
// ---------------------------------------------------------------------------

struct DemoOpts {
  int n = 10;
  int r = 2;
  double c = 1.0;
  int m = 8;
};

int run_lowerbound_demo(const GlobalOpts& g, const DemoOpts& o) {
  using namespace sostest;
  Json out;
  out["config"] = {{"n", o.n}, {"r", o.r}, {"c", o.c}, {"m", o.m}, {"seed", g.seed}};

  auto f_raw = motzkin_polynomial(o.r, o.c, o.n);
  double f_norm = norm(to_hermite(f_raw));
  MonomialPoly f_hat = f_raw * (1.0 / f_norm);
  out["f_norm_raw"] = f_norm;

  // certified farness of the normalized polynomial
  MotzkinPE pe(o.r, o.c);
  auto psd = psd_check(moment_matrix(pe), g.tol_psd);
  auto dist = distance_lower_bound(pe, f_hat);
  bool far = psd.pass && dist.ef.sign() < 0 && std::isfinite(dist.log2_bound);
  out["psd"] = to_json(psd);
  out["distance"] = to_json(dist);
  out["far"] = far;

  // sample budget vs. the full coefficient dimension of degree-2d polynomials
  const int two_d = 2 * o.r + 2;
  double dimension = capacity(o.n, two_d) + 1;
  out["coefficient_dimension"] = dimension;
  if (o.m >= dimension) {
    out["outside_lower_bound_regime"] = true;
    out["tester"] = "NO";
    out["tester_reason"] =
        "sample count meets the coefficient dimension; the data determines the "
        "polynomial, which the certificate shows is not a sum of squares";
    write_text(out.dump(2) + "\n", g.out);
    return kExitNo;
  }
  out["outside_lower_bound_regime"] = false;

  SampleSet s = sample_gaussian(o.n, o.m, g.seed);
  std::vector<std::pair<Eigen::VectorXd, double>> samples;
  for (int i = 0; i < o.m; ++i) {
    Eigen::VectorXd p = s.points.row(i);
    samples.push_back({p, evaluate(f_hat, std::span<const double>(p.data(), p.size()))});
  }
  auto verdict = sos_tester(samples, o.r + 1, 1.0, tolerances(g), g.max_iter);
  out["tester"] = verdict.yes ? "YES" : "NO";
  out["tester_detail"] = to_json(verdict);
  write_text(out.dump(2) + "\n", g.out);
  return (far && verdict.yes) ? kExitYes : kExitNo;
}

// ---------------------------------------------------------------------------
// nonneg-test
// ---------------------------------------------------------------------------

struct NonnegOpts {
  std::string input;
  double eps = 0.1;
  int d = 0;  // 0 = polynomial degree
};

int run_nonneg_test(const GlobalOpts& g, const NonnegOpts& o) {
  using namespace sostest;
  auto file = poly_from_json(load_json(o.input));
  auto f = file.as_monomial();
  if (f.terms.empty()) throw SchemaError("nonneg-test: empty polynomial");
  int d = o.d > 0 ? o.d : std::max(f.degree(), 1);
  auto verdict = nonneg_tester(
      [&](std::span<const double> p) { return evaluate(f, p); }, f.n, o.eps, d, g.seed);
  Json out;
  out["config"] = {{"input", o.input}, {"epsilon", o.eps}, {"d", d}, {"seed", g.seed}};
  out["verdict"] = to_json(verdict);
  write_text(out.dump(2) + "\n", g.out);
  return verdict.yes ? kExitYes : kExitNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sum-of-squares property-testing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name
  app.set_config("--config");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "base RNG seed")->capture_default_str();
  app.add_option("--out", g.out, "output path (default: stdout)");
  app.add_option("--tol-eval", g.tol_eval, "evaluation tolerance")->capture_default_str();
  app.add_option("--tol-psd", g.tol_psd, "PSD tolerance")->capture_default_str();
  app.add_option("--max-iter", g.max_iter, "feasibility iteration cap")->capture_default_str();
  app.add_option("--format", g.format, "csv|json (sweep output)")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  SweepOpts sweep;
  auto* cmd_sweep = app.add_subcommand("interp-sweep", "interpolation diagnostics over a grid");
  cmd_sweep->add_option("--n", sweep.ns, "variable counts")->delimiter(',')->required();
  cmd_sweep->add_option("--m", sweep.m, "sample count");
  cmd_sweep->add_option("--m-exp", sweep.m_exp, "sample count as floor(n^exp)");
  cmd_sweep->add_option("--d", sweep.d, "interpolation degree")->capture_default_str();
  cmd_sweep->add_option("--seeds", sweep.seeds, "seed list (default: --seed)")->delimiter(',');
  cmd_sweep->add_option("--values", sweep.values, "unit|ones target values")
      ->check(CLI::IsMember({"unit", "ones"}))
      ->capture_default_str();
  cmd_sweep->add_flag("--no-gsq", sweep.no_gsq, "skip the ||g^2|| column (emit nan)");

  SosCheckOpts sos;
  auto* cmd_sos = app.add_subcommand("sos-check", "SOS feasibility on a polynomial or samples");
  cmd_sos->add_option("input", sos.input, "polynomial or sample JSON file")->required();
  cmd_sos->add_option("--half-degree", sos.half_degree, "Gram half-degree d");
  cmd_sos->add_option("--norm-bound", sos.norm_bound, "Hermite norm bound on f_M");

  CertifyOpts cert;
  auto* cmd_cert = app.add_subcommand("certify", "emit a distance-from-SOS certificate");
  cmd_cert->add_option("--family", cert.family, "motzkin|xor")->required();
  cmd_cert->add_option("--r", cert.r, "motzkin exponent parameter (even)");
  cmd_cert->add_option("--c", cert.c, "motzkin constant shift");
  cmd_cert->add_option("--k", cert.k, "explicit rational k override");
  cmd_cert->add_option("--nu", cert.nu, "normalization exponent override");
  cmd_cert->add_option("--n", cert.n, "xor variable count");
  cmd_cert->add_option("--m", cert.m, "xor equation count");
  cmd_cert->add_option("--half-degree", cert.half_degree, "xor moment half-degree");

  DemoOpts demo;
  auto* cmd_demo = app.add_subcommand("lowerbound-demo",
                                      "far-but-accepted demonstration on sampled data");
  cmd_demo->add_option("--n", demo.n, "ambient variables")->capture_default_str();
  cmd_demo->add_option("--r", demo.r, "motzkin parameter")->capture_default_str();
  cmd_demo->add_option("--c", demo.c, "constant shift")->capture_default_str();
  cmd_demo->add_option("--m", demo.m, "sample count")->capture_default_str();

  NonnegOpts nn;
  auto* cmd_nn = app.add_subcommand("nonneg-test", "sampling tester for non-negativity");
  cmd_nn->add_option("input", nn.input, "polynomial JSON file")->required();
  cmd_nn->add_option("--epsilon", nn.eps, "distance parameter")->capture_default_str();
  cmd_nn->add_option("--d", nn.d, "degree override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_sweep->parsed()) return run_interp_sweep(g, sweep);
    if (cmd_sos->parsed()) return run_sos_check(g, sos);
    if (cmd_cert->parsed()) return run_certify(g, cert);
    if (cmd_demo->parsed()) return run_lowerbound_demo(g, demo);
    if (cmd_nn->parsed()) return run_nonneg_test(g, nn);
  } catch (const sostest::SchemaError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sostest::SingularSystemError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sostest::IterationLimitError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sostest::CertificateError& e) {
    std::cerr << "certificate: " << e.what() << "\n";
    return kExitNo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
