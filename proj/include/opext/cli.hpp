#pragma once

// Batch front-end: instance files in, result files out.
//
// Exit codes: 0 ok, 1 infeasible, 2 invalid input, 3 numerical failure.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "opext/func_ext.hpp"
#include "opext/io.hpp"
#include "opext/kvn.hpp"
#include "opext/oracle.hpp"
#include "opext/parrott.hpp"
#include "opext/sa_ext.hpp"

namespace opext::cli {

using io::Json;

struct Flags {
  std::optional<double> tol_rank;
  std::optional<double> tol_psd;
  std::optional<double> tol_eq;
  std::uint64_t seed = 0;
  std::optional<Endpoint> endpoint;
};

struct Response {
  int exit_code = 0;
  std::string text;
};

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k{"kvn", "sa-ext", "parrott", "strong-parrott", "functional-ext",
                                          "cstar-check"};
  return k;
}

inline bool is_kind(const std::string& k) { return std::find(kinds().begin(), kinds().end(), k) != kinds().end(); }

inline int exit_code(Errc code) {
  switch (classify(code)) {
    case Outcome::Infeasible: return 1;
    case Outcome::InvalidInput: return 2;
    case Outcome::NumericalFailure: return 3;
  }
  return 3;
}

inline const char* status_name(Errc code) {
  switch (classify(code)) {
    case Outcome::Infeasible: return "infeasible";
    case Outcome::InvalidInput: return "invalid-input";
    case Outcome::NumericalFailure: return "numerical-failure";
  }
  return "numerical-failure";
}

inline std::optional<Endpoint> parse_endpoint(const std::string& s) {
  if (s == "min") return Endpoint::Min;
  if (s == "max") return Endpoint::Max;
  if (s == "mid") return Endpoint::Mid;
  return std::nullopt;
}

inline const char* endpoint_name(Endpoint e) {
  switch (e) {
    case Endpoint::Min: return "min";
    case Endpoint::Max: return "max";
    case Endpoint::Mid: return "mid";
  }
  return "min";
}

inline std::vector<Index> parse_dims(const std::string& csv) {
  std::vector<Index> out;
  if (csv.empty()) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      fail(Errc::InvalidDims, "dims must be a comma-separated list of integers, got \"" + csv + "\"");
    }
  }
  return out;
}

inline Json encode_tolerances(const Tolerances& t) {
  Json j = Json::object();
  j["rank"] = t.rank;
  j["psd"] = t.psd;
  j["herm"] = t.herm;
  j["eq"] = t.eq;
  return j;
}

inline Tolerances resolve_tolerances(const Json& in, const Flags& flags) {
  Tolerances t;
  if (in.contains("tolerances")) {
    const Json& o = in.at("tolerances");
    if (!o.is_object()) fail(Errc::InvalidInput, "tolerances must be an object");
    if (o.contains("rank")) t.rank = io::number_field(o, "rank");
    if (o.contains("psd")) t.psd = io::number_field(o, "psd");
    if (o.contains("herm")) t.herm = io::number_field(o, "herm");
    if (o.contains("eq")) t.eq = io::number_field(o, "eq");
  }
  if (flags.tol_rank) t.rank = *flags.tol_rank;
  if (flags.tol_psd) t.psd = *flags.tol_psd;
  if (flags.tol_eq) t.eq = *flags.tol_eq;
  t.validate();
  return t;
}

/// Records postcondition residuals; `finish` fails if any exceeded its bound.
class Checks {
 public:
  Checks(Json& diag, const Tolerances& tol) : diag_(diag), tol_(tol), bound_(1e3 * tol.eq) {}

  void value(const std::string& name, double v) { diag_[name] = v; }

  void residual(const std::string& name, double v, double scale) {
    diag_[name] = v;
    if (!(v <= bound_ * (1.0 + scale))) failed_.push_back(name);
  }

  void flag(const std::string& name, bool ok) {
    diag_[name] = ok;
    if (!ok) failed_.push_back(name);
  }

  void hermitian(const std::string& name, const Matrix& m) {
    residual(name + "_asymmetry", frob(m - m.adjoint()), frob(m));
  }

  void psd(const std::string& name, const Matrix& m) {
    const Matrix h = (m + m.adjoint()) / 2.0;
    const double lo = m.rows() == 0 ? 0.0 : eigh_raw(h).values.minCoeff();
    diag_[name + "_min_eigenvalue"] = lo;
    if (!(lo >= -tol_.psd * (1.0 + spectral_norm(h)))) failed_.push_back(name + "_min_eigenvalue");
  }

  void finish() const {
    if (failed_.empty()) return;
    std::string names;
    for (const std::string& n : failed_) names += (names.empty() ? "" : ", ") + n;
    fail(Errc::NumericalFailure, "postconditions failed: " + names);
  }

 private:
  Json& diag_;
  Tolerances tol_;
  double bound_;
  std::vector<std::string> failed_;
};

namespace detail {

// Errors raised while checking an already-computed result are numerical
// failures, whatever their code.
template <class F>
void postcheck(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == Errc::NumericalFailure) throw;
    fail(Errc::NumericalFailure, std::string("while checking the result: ") + e.what());
  }
}

inline double max_agreement(const FunctionalMatrix& g, const PartialFunctional& pf) {
  double worst = 0.0;
  for (const Matrix& a : pf.ideal().elements()) worst = std::max(worst, std::abs(g(a) - pf(a)));
  return worst;
}

inline double total_f_bound(const Matrix& phi, const PsdMatrix& f, const Tolerances& tol) {
  const Index m = phi.rows();
  PartialFunctional total = PartialFunctional::make(LeftIdeal::make(Matrix::Identity(m, m), tol), phi);
  return f_bound(total, f, tol);
}

inline void run_kvn(const Json& in, const Tolerances& tol, Json& out, Checks& checks) {
  const Matrix d = io::matrix_field(in, "domain");
  const Matrix g = io::matrix_field(in, "values");
  PartialPositiveOperator op = PartialPositiveOperator::make(d, g, tol);
  checks.value("restriction_residual", opext::detail::restriction_residual(op, tol));
  PsdMatrix an = kvn_extend(op, tol);
  out["a_n"] = io::encode(an.matrix());
  postcheck([&] {
    checks.residual("extension_residual", frob(an.matrix() * d - g), frob(g));
    checks.hermitian("a_n", an.matrix());
    checks.psd("a_n", an.matrix());
  });
}

inline void run_sa_ext(const Json& in, const Tolerances& tol, Json& out, Checks& checks) {
  const PsdMatrix a = make_psd(io::matrix_field(in, "a"), tol);
  const Matrix d = io::matrix_field(in, "domain");
  const Matrix v = io::matrix_field(in, "values");
  SymmetricPartialOperator s0 = SymmetricPartialOperator::make(d, v, tol);
  ExtensionInterval iv = extend_symmetric(s0, a, tol);
  out["alpha"] = iv.alpha;
  out["s_min"] = io::encode(iv.s_min.matrix());
  out["s_max"] = io::encode(iv.s_max.matrix());
  if (in.contains("probe")) {
    const HermitianMatrix probe = hermitize(io::matrix_field(in, "probe"), tol);
    if (probe.dim() != a.dim()) fail(Errc::DimensionMismatch, "probe must be n x n");
    out["probe_in_interval"] = in_interval(probe, iv, tol);
  }
  postcheck([&] {
    for (const auto& [name, s] : {std::pair{"s_min", &iv.s_min}, std::pair{"s_max", &iv.s_max}}) {
      const Matrix& m = s->matrix();
      const std::string n = name;
      checks.hermitian(n, m);
      checks.residual(n + "_extension_residual", frob(m * d - v), frob(v) + spectral_norm(m) * frob(d));
      const double am = alpha_of_total(*s, a, tol);
      checks.value(n + "_alpha", am);
      checks.residual(n + "_alpha_excess", std::max(0.0, am - iv.alpha), iv.alpha);
    }
    checks.flag("ordered", loewner_leq(iv.s_min, iv.s_max, tol));
  });
}

inline ParrottInstance parrott_instance(const Json& in) {
  ParrottInstance p;
  p.a1 = make_psd(io::matrix_field(in, "a1"), Tolerances{});
  p.a2 = make_psd(io::matrix_field(in, "a2"), Tolerances{});
  p.domain1 = io::matrix_field(in, "domain1");
  p.values1 = io::matrix_field(in, "values1");
  p.domain2 = io::matrix_field(in, "domain2");
  p.values2 = io::matrix_field(in, "values2");
  p.alpha1 = io::number_field(in, "alpha1");
  p.alpha2 = io::number_field(in, "alpha2");
  // An n x 0 domain is written as n empty rows, so an empty row list means 0 x 0.
  if (p.domain1.size() == 0) p.domain1.resize(p.a1.dim(), 0);
  if (p.values1.size() == 0) p.values1.resize(p.a2.dim(), 0);
  if (p.domain2.size() == 0) p.domain2.resize(p.a2.dim(), 0);
  if (p.values2.size() == 0) p.values2.resize(p.a1.dim(), 0);
  return p;
}

inline Endpoint resolve_endpoint(const Json& in, const Flags& flags) {
  if (flags.endpoint) return *flags.endpoint;
  if (in.contains("endpoint")) {
    const Json& e = in.at("endpoint");
    if (e.is_string()) {
      if (auto ep = parse_endpoint(e.get<std::string>())) return *ep;
    }
    fail(Errc::InvalidInput, "endpoint must be one of min, max, mid");
  }
  return Endpoint::Min;
}

inline void run_parrott(const Json& in, const Tolerances& tol, const Flags& flags, Json& out, Checks& checks) {
  const ParrottInstance p = parrott_instance(in);
  const Endpoint ep = resolve_endpoint(in, flags);
  const Matrix t = parrott_complete(p, tol, ep);
  out["endpoint"] = endpoint_name(ep);
  out["t"] = io::encode(t);
  postcheck([&] {
    const double tn = spectral_norm(t);
    checks.residual("t_extends_t1", frob(t * p.domain1 - p.values1), frob(p.values1) + tn * frob(p.domain1));
    checks.residual("t_adjoint_extends_t2", frob(t.adjoint() * p.domain2 - p.values2),
                    frob(p.values2) + tn * frob(p.domain2));
    const double bound = completion_bound_sq(t, p.a1, p.a2, tol);
    const double declared = std::max(p.alpha1, p.alpha2);
    checks.value("bound_sq", bound);
    checks.residual("bound_excess", std::max(0.0, bound - declared), declared);
  });
}

inline void run_strong_parrott(const Json& in, const Tolerances& tol, const Flags& flags, Json& out, Checks& checks) {
  StrongParrottInstance inst;
  inst.s1 = io::matrix_field(in, "s1");
  inst.s2 = io::matrix_field(in, "s2");
  inst.t1 = io::matrix_field(in, "t1");
  inst.t2 = io::matrix_field(in, "t2");
  const Endpoint ep = resolve_endpoint(in, flags);
  const Matrix x = strong_parrott(inst, tol, ep);
  out["endpoint"] = endpoint_name(ep);
  out["x"] = io::encode(x);
  postcheck([&] {
    const double xn = spectral_norm(x);
    checks.value("norm", xn);
    checks.residual("norm_excess", std::max(0.0, xn - 1.0), 1.0);
    checks.residual("x_s1_minus_s2", frob(x * inst.s1 - inst.s2), frob(inst.s1) + frob(inst.s2));
    checks.residual("t2_x_minus_t1", frob(inst.t2 * x - inst.t1), frob(inst.t1) + frob(inst.t2));
  });
}

inline PartialFunctional partial_functional(const Json& in, const Tolerances& tol) {
  LeftIdeal ideal = LeftIdeal::make(io::matrix_field(in, "projector"), tol);
  return PartialFunctional::make(std::move(ideal), io::matrix_field(in, "gamma"));
}

inline void check_functional(const std::string& name, const FunctionalMatrix& g, const PartialFunctional& pf,
                             Checks& checks) {
  checks.hermitian(name, g.phi);
  checks.residual(name + "_agreement", max_agreement(g, pf), frob(pf.gamma()) + frob(g.phi));
}

inline void run_functional(const Json& in, const Tolerances& tol, Json& out, Checks& checks) {
  const PartialFunctional pf = partial_functional(in, tol);
  const PsdMatrix f = make_psd(io::matrix_field(in, "f"), tol);
  if (f.dim() != pf.algebra_dim()) fail(Errc::DimensionMismatch, "f must be m x m");
  FunctionalExtension ext = extend_functional(pf, f, tol);
  out["alpha"] = ext.alpha;
  out["g_min"] = io::encode(ext.g_min.phi);
  out["g_max"] = io::encode(ext.g_max.phi);
  postcheck([&] {
    for (const auto& [name, g] : {std::pair{"g_min", &ext.g_min}, std::pair{"g_max", &ext.g_max}}) {
      const std::string n = name;
      check_functional(n, *g, pf, checks);
      const double ag = total_f_bound(g->phi, f, tol);
      checks.value(n + "_alpha", ag);
      checks.residual(n + "_alpha_excess", std::max(0.0, ag - ext.alpha), ext.alpha);
    }
    checks.psd("g_max_minus_g_min", ext.g_max.phi - ext.g_min.phi);
  });
}

inline void run_cstar(const Json& in, const Tolerances& tol, const Flags& flags, Json& out, Checks& checks) {
  const PartialFunctional pf = partial_functional(in, tol);
  CStarOptions opts;
  if (in.contains("f")) opts.f = io::matrix_field(in, "f");
  if (in.contains("extension")) opts.extension = io::matrix_field(in, "extension");
  if (in.contains("samples")) {
    const Json& s = in.at("samples");
    if (!s.is_number_unsigned()) fail(Errc::InvalidInput, "samples must be a nonnegative integer");
    opts.samples = s.get<std::size_t>();
  }
  opts.seed = flags.seed;
  CStarDecision dec = cstar_extendibility(pf, tol, opts);
  const NecessityReport& nec = dec.necessity;
  out["extendible"] = dec.extendible;
  out["f_searched"] = dec.f_searched;
  out["f"] = io::encode(dec.f);
  out["g_min"] = io::encode(dec.extension.g_min.phi);
  out["g_max"] = io::encode(dec.extension.g_max.phi);
  Json n = Json::object();
  n["g"] = io::encode(nec.g.phi);
  n["f"] = io::encode(nec.f);
  n["stated_constant"] = nec.stated_constant;
  n["measured_constant"] = nec.measured_constant;
  n["exact_constant"] = nec.exact_constant;
  n["samples"] = nec.samples;
  n["skipped"] = nec.skipped;
  n["violations"] = nec.violations;
  out["necessity"] = std::move(n);
  postcheck([&] {
    check_functional("g_min", dec.extension.g_min, pf, checks);
    check_functional("g_max", dec.extension.g_max, pf, checks);
    checks.psd("necessity_f", nec.f);
    checks.flag("necessity_holds", nec.violations == 0);
  });
}

}  // namespace detail

inline Response run(const std::string& command, const std::string& text, const Flags& flags) {
  Json outputs = Json::object();
  Json diag = Json::object();
  Tolerances tol;
  std::optional<Error> error;
  try {
    if (!is_kind(command)) fail(Errc::InvalidInput, "unknown command \"" + command + "\"");
    const Json in = io::parse(text);
    if (!in.is_object()) fail(Errc::InvalidInput, "instance file must be a JSON object");
    if (in.contains("kind") && in.at("kind") != command) {
      fail(Errc::InvalidInput, "instance kind " + in.at("kind").dump() + " does not match command " + command);
    }
    tol = resolve_tolerances(in, flags);
    Checks checks(diag, tol);
    if (command == "kvn") detail::run_kvn(in, tol, outputs, checks);
    else if (command == "sa-ext") detail::run_sa_ext(in, tol, outputs, checks);
    else if (command == "parrott") detail::run_parrott(in, tol, flags, outputs, checks);
    else if (command == "strong-parrott") detail::run_strong_parrott(in, tol, flags, outputs, checks);
    else if (command == "functional-ext") detail::run_functional(in, tol, outputs, checks);
    else detail::run_cstar(in, tol, flags, outputs, checks);
    checks.finish();
  } catch (const Error& e) {
    error = e;
  } catch (const Json::exception& e) {
    error = Error(Errc::InvalidInput, e.what());
  } catch (const std::exception& e) {
    error = Error(Errc::NumericalFailure, e.what());
  }

  Json result = Json::object();
  result["status"] = error ? status_name(error->code()) : "ok";
  result["kind"] = command;
  result["outputs"] = std::move(outputs);
  result["diagnostics"] = std::move(diag);
  result["tolerances"] = encode_tolerances(tol);
  result["seed"] = flags.seed;
  if (error) {
    Json e = Json::object();
    e["code"] = std::string(to_string(error->code()));
    e["message"] = error->what();
    result["error"] = std::move(e);
  }
  return {error ? exit_code(error->code()) : 0, io::dump(result)};
}

inline Response error_response(const std::string& kind, const Error& e, std::uint64_t seed) {
  Json result = Json::object();
  result["status"] = status_name(e.code());
  result["kind"] = kind;
  result["seed"] = seed;
  Json err = Json::object();
  err["code"] = std::string(to_string(e.code()));
  err["message"] = e.what();
  result["error"] = std::move(err);
  return {exit_code(e.code()), io::dump(result)};
}

inline Response run_file(const std::string& command, const std::string& path, const Flags& flags) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream f(path, std::ios::binary);
    if (!f) return error_response(command, Error(Errc::InvalidInput, "cannot read " + path), flags.seed);
    text.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }
  return run(command, text, flags);
}

struct Generated {
  Json instance;
  std::optional<Matrix> reference;  // hidden PSD B for kvn
};

inline Generated generate(const std::string& kind, const std::vector<Index>& dims, Rng& rng) {
  Generated g;
  Json& j = g.instance;
  j = Json::object();
  j["kind"] = kind;
  if (kind == "kvn") {
    oracle::KvnInstance c = oracle::random_kvn(dims, rng);
    j["domain"] = io::encode(c.op.domain());
    j["values"] = io::encode(c.op.values());
    g.reference = c.hidden.matrix();
  } else if (kind == "sa-ext") {
    oracle::SaExtInstance c = oracle::random_sa_ext(dims, rng);
    j["a"] = io::encode(c.a.matrix());
    j["domain"] = io::encode(c.s0.domain());
    j["values"] = io::encode(c.s0.values());
  } else if (kind == "parrott") {
    oracle::ParrottCase c = oracle::random_parrott(dims, rng);
    const ParrottInstance& p = c.inst;
    j["a1"] = io::encode(p.a1.matrix());
    j["a2"] = io::encode(p.a2.matrix());
    j["alpha1"] = p.alpha1;
    j["alpha2"] = p.alpha2;
    j["domain1"] = io::encode(p.domain1);
    j["values1"] = io::encode(p.values1);
    j["domain2"] = io::encode(p.domain2);
    j["values2"] = io::encode(p.values2);
  } else if (kind == "strong-parrott") {
    oracle::StrongParrottCase c = oracle::random_strong_parrott(dims, rng);
    j["s1"] = io::encode(c.inst.s1);
    j["s2"] = io::encode(c.inst.s2);
    j["t1"] = io::encode(c.inst.t1);
    j["t2"] = io::encode(c.inst.t2);
  } else if (kind == "functional-ext" || kind == "cstar-check") {
    oracle::FunctionalInstance c = oracle::random_functional(dims, rng);
    j["projector"] = io::encode(c.pf.ideal().projector());
    j["gamma"] = io::encode(c.pf.gamma());
    j["f"] = io::encode(c.f.matrix());
  } else {
    fail(Errc::InvalidInput, "unknown kind \"" + kind + "\"");
  }
  return g;
}

inline Response gen(const std::string& kind, const std::vector<Index>& dims, std::uint64_t seed) {
  try {
    Rng rng(seed);
    Generated g = generate(kind, dims, rng);
    g.instance["seed"] = seed;
    return {0, io::dump(g.instance)};
  } catch (const Error& e) {
    return error_response(kind, e, seed);
  }
}

/// Generates `count` instances from independent streams of `seed`, runs each
/// through the same pipeline as `run`, and reports pass/fail counts.
inline Response verify(const std::string& kind, std::size_t count, std::uint64_t seed, const std::vector<Index>& dims,
                       const Flags& flags) {
  if (!is_kind(kind)) return error_response(kind, Error(Errc::InvalidInput, "unknown kind \"" + kind + "\""), seed);
  const Rng base(seed);
  std::size_t passed = 0;
  Json failures = Json::array();
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = base.split(i);
    std::string status = "ok", message;
    try {
      Generated g = generate(kind, dims, rng);
      Flags f = flags;
      f.seed = rng.next_u64();
      Response r = run(kind, io::dump(g.instance), f);
      const Json res = io::parse(r.text);
      status = res.at("status").get<std::string>();
      if (status == "ok" && g.reference) {
        const Tolerances tol = resolve_tolerances(g.instance, flags);
        const HermitianMatrix an = HermitianMatrix::symmetrized(io::matrix_field(res.at("outputs"), "a_n"));
        if (!loewner_leq(an, HermitianMatrix::symmetrized(*g.reference), tol)) {
          status = "numerical-failure";
          message = "extension is not below the generating operator";
        }
      } else if (res.contains("error")) {
        message = res.at("error").at("message").get<std::string>();
      }
    } catch (const Error& e) {
      if (e.code() == Errc::InvalidDims) return error_response(kind, e, seed);
      status = status_name(e.code());
      message = e.what();
    }
    if (status == "ok") {
      ++passed;
    } else {
      Json f = Json::object();
      f["index"] = i;
      f["status"] = status;
      f["message"] = message;
      failures.push_back(std::move(f));
    }
  }
  Json result = Json::object();
  result["status"] = passed == count ? "ok" : "numerical-failure";
  result["kind"] = kind;
  result["count"] = count;
  result["seed"] = seed;
  result["passed"] = passed;
  result["failed"] = count - passed;
  result["failures"] = std::move(failures);
  return {passed == count ? 0 : 3, io::dump(result)};
}

}  // namespace opext::cli
