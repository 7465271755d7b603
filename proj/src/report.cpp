#include "hypclass/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hypclass/error.hpp"
#include "hypclass/factor.hpp"
#include "hypclass/flow.hpp"
#include "hypclass/normform.hpp"
#include "hypclass/spectral.hpp"

namespace hypclass {

namespace {

Json real(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : v < 0 ? "-inf" : "nan";
}

Json point_json(const PhasePoint& rho) {
  Json x = Json::array(), xi = Json::array();
  for (double v : rho.x) x.push_back(real(v));
  for (double v : rho.xi) xi.push_back(real(v));
  return Json{{"x", x}, {"xi", xi}};
}

Json complex_list(const Spectrum& s, double tol) {
  Json out = Json::array();
  for (const auto& z : s) out.push_back(Json{{"re", real(z.real())}, {"im", real(z.imag())}, {"tol", tol}});
  return out;
}

Json region_json(const Region& r) {
  Json shells = Json::array();
  for (double e : r.shells) shells.push_back(e);
  return Json{{"box", r.box},
              {"samples", r.samples},
              {"seed", r.seed},
              {"rng", "splitmix64-counter"},
              {"shells", shells},
              {"sweep", Json{{"var", std::string(r.sweep_var.kind == Var::Kind::X ? "x" : "xi") +
                                         std::to_string(r.sweep_var.index)},
                             {"lo", r.sweep_lo},
                             {"hi", r.sweep_hi},
                             {"steps", r.sweep_steps}}}};
}

Json header(const std::string& command, const Problem& pb, const Region& region, const RunOptions& opt) {
  Json params = Json::object();
  for (const auto& [k, v] : pb.params) params[k] = v;
  // The SIMD kernel is left out on purpose: both paths agree bitwise and the
  // report has to be byte-identical across machines.
  return Json{{"tool", "hypclass"},
              {"version", kToolVersion},
              {"command", command},
              {"input", pb.label},
              {"input_digest", opt.input_digest.empty() ? digest(pb.label) : opt.input_digest},
              {"params", params},
              {"region", region_json(region)}};
}

Json classify_entry(const SymbolSystem& sys, const PhasePoint& rho, const ClassifyOptions& co) {
  Json e{{"point", point_json(rho)}};
  try {
    SpectralReport r = classify(sys, rho, co);
    e["label"] = to_string(r.label);
    e["theta"] = tv(r.theta, co.theta_band);
    e["alpha_norm"] = tv(r.alpha_norm, kAlphaUnitTol);
    e["dimW"] = tv_int(r.dimW);
    e["rank"] = tv_int(r.rank);
    e["trace_plus"] = tv(r.trace_plus, co.real_part_tol);
    e["spectrum_checked"] = r.spectrum_checked;
  } catch (const Error& err) {
    e["error"] = err.what();
  }
  return e;
}

Report cmd_classify(const Problem& pb, const Region& region, const RunOptions& opt) {
  Report rep;
  ClassifyOptions co;
  if (opt.tol) co.theta_band = *opt.tol;
  auto samples = sigma_samples(pb.sys, region, region.samples, 1);
  Json rows = Json::array();
  std::map<std::string, long long> counts{{"effective", 0}, {"type1", 0}, {"type2", 0}, {"error", 0}};
  for (const auto& rho : samples) {
    Json e = classify_entry(pb.sys, rho, co);
    counts[e.contains("error") ? "error" : e["label"].get<std::string>()]++;
    rows.push_back(std::move(e));
  }
  Json summary = Json::object();
  for (const auto& [k, v] : counts) summary[k] = tv_int(v);
  rep.doc["classify"] = Json{{"summary", summary}, {"samples", rows}};
  return rep;
}

Report cmd_sweep(const Problem& pb, const Region& region, const RunOptions& opt) {
  Report rep;
  ClassifyOptions co;
  if (opt.tol) co.theta_band = *opt.tol;
  Json rows = Json::array(), bands = Json::array();
  const Var v = region.sweep_var;
  std::string last;
  double lo = 0.0, hi = 0.0;
  auto flush = [&]() {
    if (!last.empty()) bands.push_back(Json{{"label", last}, {"from", lo}, {"to", hi}});
  };
  for (const auto& rho : sweep_points(pb.sys, region)) {
    Json e = classify_entry(pb.sys, rho, co);
    double at = rho[v];
    std::string label = e.contains("error") ? "error" : e["label"].get<std::string>();
    e["at"] = at;
    if (label != last) {
      flush();
      last = label;
      lo = at;
    }
    hi = at;
    rows.push_back(std::move(e));
  }
  flush();
  rep.doc["sweep"] = Json{{"bands", bands}, {"points", rows}};
  return rep;
}

Report cmd_normal_form(const Problem& pb, const Region& region, const RunOptions& opt) {
  Report rep;
  NormalFormOptions no;
  if (opt.tol) no.tol = *opt.tol;
  auto samples = neighborhood_samples(pb.sys, region, region.samples, 2);
  NormalFormCertificate c = verify_normal_form(pb.sys, samples, no);
  Json cert{{"r", tv_int(c.r)},
            {"c1", tv(c.c1, c.tol)},
            {"c2", tv(c.c2, c.tol)},
            {"c3", tv(c.c3, c.floor)},
            {"c4", tv(c.c4, c.tol)},
            {"c5", tv(c.c5, c.floor)},
            {"samples", tv_int(static_cast<long long>(c.samples))},
            {"verdict", c.verdict}};
  rep.doc["certificate"] = cert;
  try {
    PointwiseFrame f = pointwise_normal_form(pb.sys, pb.sys.base_point());
    const double tol = 1e-8 * std::max(1.0, f.A.max_abs());
    Json alpha = Json::array();
    for (double a : f.alpha) alpha.push_back(real(a));
    Json C = Json::array();
    for (std::size_t i = 0; i < f.C.rows(); ++i) {
      Json row = Json::array();
      for (double a : f.C.row(i)) row.push_back(real(a));
      C.push_back(row);
    }
    rep.doc["pointwise_frame"] = Json{{"r", tv_int(f.r)},
                                      {"alpha", alpha},
                                      {"alpha_norm", tv(f.alpha_norm, tol)},
                                      {"theta", tv(f.theta, tol)},
                                      {"delta", tv(f.delta, tol)},
                                      {"det_tail", tv(f.det_tail, tol)},
                                      {"congruence_residual", tv(f.congruence_residual, tol)},
                                      {"xi0_residual", tv(f.xi0_residual, tol)},
                                      {"phi2_residual", tv(f.phi2_residual, tol)},
                                      {"C", C}};
  } catch (const Error& e) {
    rep.doc["pointwise_frame"] = Json{{"error", e.what()}, {"kind", to_string(e.kind())}};
  }
  if (pb.theta_ext) {
    ExtensionReport er = extension_check(pb.sys, *pb.theta_ext, samples, no.tol);
    rep.doc["extension"] = Json{{"theta_ext", to_string(*pb.theta_ext)},
                                {"fit1_residual", tv(er.fit1_residual, er.tol)},
                                {"fit2_residual", tv(er.fit2_residual, er.tol)},
                                {"sigma_residual", tv(er.sigma_residual, er.tol)},
                                {"agreement", tv(er.agreement, er.tol)},
                                {"range_ok", er.range_ok},
                                {"pass", er.pass}};
  }
  return rep;
}

Json transition_json(const TransitionAnalysis& ta, const TransitionOptions& to) {
  const double tol = to.tol;
  Json j{{"nu", tv(ta.nu, tol)},
         {"kappa", tv(ta.kappa, tol)},
         {"delta", tv(ta.delta, tol)},
         {"discriminant", tv(ta.discriminant, tol)},
         {"exists_tangent", ta.exists_tangent},
         {"case", to_string(ta.flow_case)},
         {"dependence_residual", tv(ta.dependence_residual, to.dependence_tol)},
         {"theta_base", tv(ta.theta_base, tol)},
         {"precondition_residual", tv(ta.precondition_residual, tol)},
         {"r", tv_int(ta.r)}};
  if (ta.roots) {
    Json roots = Json::array();
    for (double r : ta.roots->roots) roots.push_back(tv(r, 1e-12));
    j["roots"] = roots;
    j["b"] = tv(ta.roots->b, 1e-12);
  }
  if (ta.leading) {
    const auto& c = *ta.leading;
    j["leading"] = Json{{"x0", tv(c.x0, 1e-12)},
                        {"phi1", tv(c.phi1, 1e-12)},
                        {"phi2", tv(c.phi2, 1e-12)},
                        {"theta", tv(c.theta, 1e-12)},
                        {"xi0", tv(c.xi0, 1e-12)},
                        {"residual", tv(ta.flow_case == FlowCase::Independent ? c.residual_independent
                                                                              : c.residual_dependent,
                                        1e-10)}};
  }
  if (ta.a_I) {
    const auto& a = *ta.a_I;
    Json cp = Json::array();
    for (double c : a.charpoly) cp.push_back(real(c));
    j["A_I"] = Json{{"eigenvalues", complex_list(a.eigenvalues, 1e-8)},
                    {"charpoly", cp},
                    {"charpoly_residual", tv(a.charpoly_residual, 1e-10)},
                    {"has_one", a.has_one},
                    {"others_negative", a.others_negative}};
  }
  return j;
}

Report cmd_transition(const Problem& pb, const Region&, const RunOptions& opt) {
  Report rep;
  TransitionOptions to;
  if (opt.tol) to.tol = *opt.tol;
  rep.doc["transition"] = transition_json(transition_invariants(pb.sys, to), to);
  return rep;
}

std::string trajectory_csv(const SymbolSystem& sys, const TangentResult& tr) {
  // One curve ordered by decreasing s: the leg toward rho bar reversed, then
  // the leg away from it.
  Trajectory all;
  all.n = tr.away.n;
  for (std::size_t i = tr.toward.size(); i-- > 1;) {
    all.s.push_back(tr.toward.s[i]);
    all.z.push_back(tr.toward.z[i]);
    all.p.push_back(tr.toward.p[i]);
  }
  for (std::size_t i = 0; i < tr.away.size(); ++i) {
    all.s.push_back(tr.away.s[i]);
    all.z.push_back(tr.away.z[i]);
    all.p.push_back(tr.away.p[i]);
  }
  std::ostringstream os;
  write_csv(os, sys, all);
  return os.str();
}

Report cmd_flow(const Problem& pb, const Region&, const RunOptions& opt) {
  Report rep;
  TransitionOptions to;
  if (opt.tol) to.tol = *opt.tol;
  TransitionAnalysis ta = transition_invariants(pb.sys, to);
  rep.doc["transition"] = transition_json(ta, to);
  TangentResult tr = tangent_search(pb.sys, ta, pb.tangency);
  constexpr double order_tol = 0.15;
  Json orders = Json::object();
  for (const auto& o : tr.orders)
    orders[o.name] = Json{{"order", tv(o.fit.order, order_tol)},
                          {"limit", real(o.fit.limit)},
                          {"rms", real(o.fit.rms)},
                          {"points", o.fit.points},
                          {"identically_zero", o.fit.identically_zero}};
  Json seeds = Json::array();
  for (const auto& s : tr.seeds) {
    Json e{{"t0", s.t0}, {"ok", s.ok}};
    if (s.ok)
      e["quality"] = real(s.quality);
    else
      e["failure"] = s.failure;
    seeds.push_back(e);
  }
  rep.doc["flow"] = Json{{"t0", tr.t0},
                         {"b", tv(tr.b, 1e-12)},
                         {"window", Json{{"lo", tr.window_lo}, {"hi", tr.window_hi}}},
                         {"p_drift", tv(tr.p_drift, 1e-9)},
                         {"toward_x0_ratio", real(tr.toward_x0_ratio)},
                         {"away_points", tr.away.size()},
                         {"orders", orders},
                         {"seeds", seeds}};
  if (opt.csv) rep.files.emplace_back("trajectory.csv", trajectory_csv(pb.sys, tr));
  return rep;
}

Json defn_one_json(const DefnOneReport& d) {
  Json shells = Json::array();
  for (const auto& s : d.shells)
    shells.push_back(Json{{"eps", s.eps},
                          {"C1", real(s.c1)},
                          {"C2", real(s.c2)},
                          {"q_min", tv(s.q_min, 0.0)},
                          {"samples", s.samples}});
  return Json{{"C1", real(d.C1)},
              {"C2", real(d.C2)},
              {"growth", tv(d.growth, 2.0)},
              {"growth_two_decades", tv(d.growth_two_decades, 4.0)},
              {"shells", shells},
              {"pass", d.pass}};
}

Report cmd_factorize(const Problem& pb, const Region& region, const RunOptions& opt) {
  Report rep;
  FactorOptions fo;
  const SymbolSystem& sys = pb.sys;
  const int need = 4 * sys.d() * static_cast<int>(sys.dim() + 1);
  const int count = std::max(region.samples, need);
  auto samples = neighborhood_samples(sys, region, count, 2);
  Factorization f = build_factorization(sys, samples, fo, pb.theta_ext);
  const double id_tol = opt.tol ? *opt.tol : 1e-9;
  rep.ok = f.identity_residual <= id_tol;
  Json beta = Json::array();
  for (double b : f.beta.beta) beta.push_back(real(b));
  rep.doc["factorization"] = Json{{"theta_tilde", to_string(f.theta_tilde)},
                                  {"rewritten", pb.theta_ext.has_value()},
                                  {"lam", f.lam},
                                  {"gamma", f.gamma},
                                  {"identity_residual", tv(f.identity_residual, id_tol)},
                                  {"q_min", tv(f.q_min, fo.q_tol)},
                                  {"beta", beta},
                                  {"beta_orthogonality", tv(f.beta.orthogonality, 1e-10)},
                                  {"beta_fit_residual", tv(f.beta.fit_residual, 1e-6)},
                                  {"samples", f.samples}};
  rep.doc["defn_one"] = defn_one_json(check_defn_one(f, *f.prepared, region));
  SufficientReport sc = sufficient_conditions(*f.prepared, region, fo);
  Json sshells = Json::array();
  for (const auto& s : sc.shells)
    sshells.push_back(Json{{"eps", s.eps}, {"r1", real(s.r1)}, {"r2", real(s.r2)}, {"theta_min", tv(s.theta_min, 1e-12)}});
  Json sj{{"cond1", sc.cond1},
          {"cond2", sc.cond2},
          {"growth1", tv(sc.growth1, 2.0)},
          {"growth2", tv(sc.growth2, 2.0)},
          {"theta_nonnegative", sc.theta_nonnegative},
          {"shells", sshells},
          {"implication_ok", sc.implication_ok}};
  if (sc.implied) sj["implied_defn_one"] = defn_one_json(*sc.implied);
  rep.doc["sufficient_conditions"] = sj;
  rep.ok = rep.ok && sc.implication_ok;
  LowerBound lb1 = q_lower_bound(f, samples);
  LowerBound lb2 = q_lower_bound(f, neighborhood_samples(sys, region, 2 * count, 3));
  double spread = lb1.c > 0.0 ? std::abs(lb2.c - lb1.c) / lb1.c : HUGE_VAL;
  rep.doc["q_lower_bound"] = Json{{"c", tv(lb1.c, 0.0)},
                                  {"c_dense", tv(lb2.c, 0.0)},
                                  {"relative_spread", tv(spread, 0.2)},
                                  {"stable", lb1.c > 0.0 && lb2.c > 0.0 && spread <= 0.2}};
  return rep;
}

void render(const Json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    if (j.contains("value") && j.contains("tol") && j.size() == 2) {
      os << prefix << " = " << j["value"].dump() << "  (tol " << j["tol"].dump() << ")\n";
      return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) render(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array()) {
    bool scalars = true;
    for (const auto& e : j) scalars = scalars && !e.is_structured();
    if (scalars) {
      os << prefix << " = " << j.dump() << "\n";
      return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      // Named entries (selftest checks) read better by name than by index.
      bool named = j[i].is_object() && j[i].contains("name") && j[i]["name"].is_string();
      std::string key = named ? j[i]["name"].get<std::string>() : std::to_string(i);
      Json body = j[i];
      if (named) body.erase("name");
      render(body, prefix + "[" + key + "]", os);
    }
  } else {
    os << prefix << " = " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

}  // namespace

Json tv(double value, double tol) { return Json{{"value", real(value)}, {"tol", real(tol)}}; }
Json tv_int(long long value) { return Json{{"value", value}, {"tol", 0}}; }

std::string digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Report::text() const {
  std::ostringstream os;
  render(doc, "", os);
  return os.str();
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"classify", "normal-form", "transition", "flow",
                                              "factorize", "sweep", "selftest"};
  return names;
}

Report run(const std::string& command, const Problem& pb, const RunOptions& opt) {
  if (command == "selftest") return run_selftest(opt.seed.value_or(42));
  Region region = pb.region;
  if (opt.seed) region.seed = *opt.seed;
  Report rep;
  if (command == "classify")
    rep = cmd_classify(pb, region, opt);
  else if (command == "sweep")
    rep = cmd_sweep(pb, region, opt);
  else if (command == "normal-form")
    rep = cmd_normal_form(pb, region, opt);
  else if (command == "transition")
    rep = cmd_transition(pb, region, opt);
  else if (command == "flow")
    rep = cmd_flow(pb, region, opt);
  else if (command == "factorize")
    rep = cmd_factorize(pb, region, opt);
  else
    throw Error(ErrorKind::Precondition, "unknown command '" + command + "'");
  Json doc = header(command, pb, region, opt);
  for (auto it = rep.doc.begin(); it != rep.doc.end(); ++it) doc[it.key()] = it.value();
  doc["status"] = rep.ok ? "ok" : "failed";
  rep.doc = std::move(doc);
  rep.command = command;
  return rep;
}

}  // namespace hypclass
