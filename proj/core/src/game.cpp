#include "mfg/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "mfg/error.hpp"

namespace mfg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double need_num(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) fail(where, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

// Smallest off-diagonal distance; +inf on a single point.
double min_offdiag(const FiniteMetricSpace& s) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j)
      if (i != j) m = std::min(m, s.dist(i, j));
  return m;
}

FiniteMetricSpace parse_space(const json& j, const std::string& where, const char* prefix) {
  if (!j.is_object()) fail(where, "must be an object with 'metric' (and optional 'labels')");
  const json& jm = need(j, "metric", where);
  if (!jm.is_array() || jm.empty()) fail(where, "'metric' must be a nonempty square array");
  const int n = static_cast<int>(jm.size());
  std::vector<double> metric;
  metric.reserve(static_cast<std::size_t>(n) * n);
  for (const auto& row : jm) {
    if (!row.is_array() || static_cast<int>(row.size()) != n) fail(where, "'metric' must be square");
    for (const auto& v : row) {
      if (!v.is_number()) fail(where, "'metric' entries must be numbers");
      metric.push_back(v.get<double>());
    }
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    for (const auto& l : j.at("labels")) {
      if (!l.is_string()) fail(where, "'labels' must be strings");
      labels.push_back(l.get<std::string>());
    }
    if (static_cast<int>(labels.size()) != n) fail(where, "'labels' size must match 'metric'");
  } else {
    for (int i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  }
  try {
    return make_space(labels, metric);
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
}

Dist parse_dist(const json& j, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    fail(where, "must be an array of " + std::to_string(n) + " probabilities");
  std::vector<double> w;
  for (const auto& v : j) {
    if (!v.is_number()) fail(where, "entries must be numbers");
    w.push_back(v.get<double>());
  }
  try {
    return make_dist(w);
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
}

// Kernel table: either [x][a] -> dist (stationary, broadcast over steps) or
// [t][x][a] -> dist. Stored flattened as [t][x*na+a].
std::vector<std::vector<Dist>> parse_kernel_table(const json& j, int steps, int nx, int na, int ny,
                                                  const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty() || !j[0][0].is_array() ||
      j[0][0].empty())
    fail(where, "must be a [x][a]->row or [t][x][a]->row nested array");
  const bool per_step = j[0][0][0].is_array();
  std::vector<std::vector<Dist>> out;
  auto parse_step = [&](const json& js, int t) {
    if (!js.is_array() || static_cast<int>(js.size()) != nx)
      fail(where, "step " + std::to_string(t + 1) + " must list all " + std::to_string(nx) + " states");
    std::vector<Dist> rows;
    rows.reserve(static_cast<std::size_t>(nx) * na);
    for (int x = 0; x < nx; ++x) {
      const json& jx = js[static_cast<std::size_t>(x)];
      if (!jx.is_array() || static_cast<int>(jx.size()) != na)
        fail(where, "state " + std::to_string(x) + " must list all " + std::to_string(na) + " actions");
      for (int a = 0; a < na; ++a)
        rows.push_back(parse_dist(jx[static_cast<std::size_t>(a)], ny,
                                  where + "[" + std::to_string(x) + "][" + std::to_string(a) + "]"));
    }
    out.push_back(std::move(rows));
  };
  if (per_step) {
    if (static_cast<int>(j.size()) != steps)
      fail(where, "per-step table must have " + std::to_string(steps) + " entries");
    for (int t = 0; t < steps; ++t) parse_step(j[static_cast<std::size_t>(t)], t);
  } else {
    parse_step(j, 0);
    for (int t = 1; t < steps; ++t) out.push_back(out[0]);
  }
  return out;
}

// Scalar table: [x][a] or [t][x][a] -> [t][x*na+a].
std::vector<std::vector<double>> parse_scalar_table(const json& j, int steps, int nx, int na,
                                                    const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    fail(where, "must be a [x][a] or [t][x][a] nested array of numbers");
  const bool per_step = j[0][0].is_array();
  std::vector<std::vector<double>> out;
  auto parse_step = [&](const json& js) {
    if (!js.is_array() || static_cast<int>(js.size()) != nx) fail(where, "must list all states");
    std::vector<double> vals;
    for (int x = 0; x < nx; ++x) {
      const json& jx = js[static_cast<std::size_t>(x)];
      if (!jx.is_array() || static_cast<int>(jx.size()) != na) fail(where, "must list all actions");
      for (const auto& v : jx) {
        if (!v.is_number()) fail(where, "entries must be numbers");
        vals.push_back(v.get<double>());
      }
    }
    out.push_back(std::move(vals));
  };
  if (per_step) {
    if (static_cast<int>(j.size()) != steps)
      fail(where, "per-step table must have " + std::to_string(steps) + " entries");
    for (const auto& js : j) parse_step(js);
  } else {
    parse_step(j);
    for (int t = 1; t < steps; ++t) out.push_back(out[0]);
  }
  return out;
}

// Weight table: [x][a][y] or [t][x][a][y] -> [t][x*na+a][y]; plain reals.
std::vector<std::vector<std::vector<double>>> parse_mix_table(const json& j, int steps, int nx,
                                                              int na, int ny,
                                                              const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty() || !j[0][0].is_array() ||
      j[0][0].empty())
    fail(where, "must be a [x][a][y] or [t][x][a][y] nested array");
  const bool per_step = j[0][0][0].is_array();
  std::vector<std::vector<std::vector<double>>> out;
  auto parse_step = [&](const json& js) {
    if (!js.is_array() || static_cast<int>(js.size()) != nx) fail(where, "must list all states");
    std::vector<std::vector<double>> rows;
    for (int x = 0; x < nx; ++x) {
      const json& jx = js[static_cast<std::size_t>(x)];
      if (!jx.is_array() || static_cast<int>(jx.size()) != na) fail(where, "must list all actions");
      for (int a = 0; a < na; ++a) {
        const json& ja = jx[static_cast<std::size_t>(a)];
        if (!ja.is_array() || static_cast<int>(ja.size()) != ny)
          fail(where, "weight rows must have one entry per state");
        std::vector<double> w;
        for (const auto& v : ja) {
          if (!v.is_number()) fail(where, "entries must be numbers");
          w.push_back(v.get<double>());
        }
        rows.push_back(std::move(w));
      }
    }
    out.push_back(std::move(rows));
  };
  if (per_step) {
    if (static_cast<int>(j.size()) != steps)
      fail(where, "per-step table must have " + std::to_string(steps) + " entries");
    for (const auto& js : j) parse_step(js);
  } else {
    parse_step(j);
    for (int t = 1; t < steps; ++t) out.push_back(out[0]);
  }
  return out;
}

// Policy rows: [x] -> action dist or [t][x] -> action dist.
std::vector<std::vector<Dist>> parse_policy_table(const json& j, int steps, int nx, int na,
                                                  const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    fail(where, "must be a [x]->row or [t][x]->row nested array");
  const bool per_step = j[0][0].is_array();
  std::vector<std::vector<Dist>> out;
  auto parse_step = [&](const json& js) {
    if (!js.is_array() || static_cast<int>(js.size()) != nx) fail(where, "must list all states");
    std::vector<Dist> rows;
    for (int x = 0; x < nx; ++x)
      rows.push_back(parse_dist(js[static_cast<std::size_t>(x)], na,
                                where + "[" + std::to_string(x) + "]"));
    out.push_back(std::move(rows));
  };
  if (per_step) {
    if (static_cast<int>(j.size()) != steps)
      fail(where, "per-step table must have " + std::to_string(steps) + " entries");
    for (const auto& js : j) parse_step(js);
  } else {
    parse_step(j);
    for (int t = 1; t < steps; ++t) out.push_back(out[0]);
  }
  return out;
}

Modulus parse_modulus(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object with a 'kind'");
  const json& k = need(j, "kind", where);
  if (!k.is_string()) fail(where, "'kind' must be a string");
  const std::string kind = k.get<std::string>();
  try {
    if (kind == "zero") return zero_modulus();
    if (kind == "infinite") return infinite_modulus();
    if (kind == "linear") return linear_modulus(need_num(j, "K", where), need_num(j, "cap", where));
    if (kind == "power")
      return power_modulus(need_num(j, "K", where), need_num(j, "alpha", where),
                           need_num(j, "cap", where));
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
  fail(where, "unknown modulus kind '" + kind + "'");
}

json modulus_json(const Modulus& m) {
  switch (m.kind) {
    case ModulusKind::zero:
      return json{{"kind", "zero"}};
    case ModulusKind::infinite:
      return json{{"kind", "infinite"}};
    case ModulusKind::linear:
      return json{{"kind", "linear"}, {"K", m.K}, {"cap", m.cap}};
    case ModulusKind::power:
      return json{{"kind", "power"}, {"K", m.K}, {"alpha", m.alpha}, {"cap", m.cap}};
  }
  throw ConsistencyError("unhandled modulus kind");
}

PolicySpec parse_policy(const json& j, int steps, int nx, int na, int ny,
                        const std::string& where) {
  PolicySpec p;
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (j.contains("name")) p.name = j.at("name").get<std::string>();
  if (kind == "oblivious_table") {
    p.kind = PolicySpec::Kind::oblivious_table;
    p.table = parse_policy_table(need(j, "table", where), steps, nx, na, where + ".table");
    p.vartheta = zero_modulus();
  } else if (kind == "logit_meanfield") {
    p.kind = PolicySpec::Kind::logit_meanfield;
    p.coef_feat = need_num(j, "coef_feat", where);
    p.coef_mix = need_num(j, "coef_mix", where);
    const json& jphi = need(j, "phi", where);
    if (!jphi.is_array() || static_cast<int>(jphi.size()) != nx)
      fail(where, "'phi' must be a [x][a] array");
    for (const auto& row : jphi) {
      if (!row.is_array() || static_cast<int>(row.size()) != na)
        fail(where, "'phi' must be a [x][a] array");
      p.phi.push_back(row.get<std::vector<double>>());
    }
    const json& jmix = need(j, "mix", where);
    if (!jmix.is_array() || static_cast<int>(jmix.size()) != na)
      fail(where, "'mix' must be a [a][y] array");
    for (const auto& row : jmix) {
      if (!row.is_array() || static_cast<int>(row.size()) != ny)
        fail(where, "'mix' must be a [a][y] array");
      p.mix.push_back(row.get<std::vector<double>>());
    }
    p.vartheta = j.contains("theta") ? parse_modulus(j.at("theta"), where + ".theta")
                                     : Modulus{};  // resolved by the caller from the tables
  } else if (kind == "threshold") {
    p.kind = PolicySpec::Kind::threshold;
    const json& jw = need(j, "watch", where);
    if (!jw.is_number_integer()) fail(where, "'watch' must be a state index");
    p.watch = jw.get<int>();
    if (p.watch < 0 || p.watch >= ny) fail(where, "'watch' out of range");
    p.cutoff = need_num(j, "cutoff", where);
    p.lo = parse_policy_table(need(j, "lo", where), steps, nx, na, where + ".lo");
    p.hi = parse_policy_table(need(j, "hi", where), steps, nx, na, where + ".hi");
    p.vartheta = infinite_modulus();  // discontinuous by design
  } else {
    fail(where, "unknown policy kind '" + kind + "' (plugin policies are host-code only)");
  }
  return p;
}

// Softmax continuity constant of a logit family: the action weights shift by
// at most |coef_mix|*spread(mix[a]) per unit of TV in xi, and TV <= factor*BL.
Modulus derived_logit_modulus(const PolicySpec& p, const FiniteMetricSpace& states) {
  double spread = 0.0;
  for (const auto& row : p.mix) {
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    spread = std::max(spread, *hi - *lo);
  }
  const double dmin = min_offdiag(states);
  const double factor = std::isfinite(dmin) ? std::max(1.0, 2.0 / dmin) : 1.0;
  const double K = std::abs(p.coef_mix) * spread * factor;
  if (K == 0.0) return zero_modulus();
  return linear_modulus(K, std::min(1.0, std::abs(p.coef_mix) * spread));
}

json policy_json(const PolicySpec& p, int /*steps*/) {
  json j;
  j["name"] = p.name;
  auto table_json = [](const std::vector<std::vector<Dist>>& table) {
    json jt = json::array();
    for (const auto& step : table) {
      json js = json::array();
      for (const auto& row : step) js.push_back(row.w);
      jt.push_back(std::move(js));
    }
    return jt;
  };
  switch (p.kind) {
    case PolicySpec::Kind::oblivious_table:
      j["kind"] = "oblivious_table";
      j["table"] = table_json(p.table);
      break;
    case PolicySpec::Kind::logit_meanfield:
      j["kind"] = "logit_meanfield";
      j["coef_feat"] = p.coef_feat;
      j["coef_mix"] = p.coef_mix;
      j["phi"] = p.phi;
      j["mix"] = p.mix;
      j["theta"] = modulus_json(p.vartheta);
      break;
    case PolicySpec::Kind::threshold:
      j["kind"] = "threshold";
      j["watch"] = p.watch;
      j["cutoff"] = p.cutoff;
      j["lo"] = table_json(p.lo);
      j["hi"] = table_json(p.hi);
      break;
    case PolicySpec::Kind::plugin:
      throw ValidationError("plugin policies cannot be serialized");
  }
  return j;
}

GameSpec game_from_json(const json& j) {
  if (j.is_string()) return builtin_game(j.get<std::string>());
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  if (j.contains("builtin")) return builtin_game(j.at("builtin").get<std::string>());

  static const char* known[] = {"name",     "horizon", "states",   "actions", "initial",
                                "transition", "cost",    "terminal", "evaluator", "moduli",
                                "policy"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ValidationError("config: unknown field '" + it.key() + "'");
  }

  GameSpec g;
  if (j.contains("name")) g.name = j.at("name").get<std::string>();
  const json& jh = need(j, "horizon", "config");
  if (!jh.is_number_integer() || jh.get<int>() < 2)
    throw ValidationError("config: 'horizon' must be an integer >= 2");
  g.horizon = jh.get<int>();
  const int steps = g.horizon - 1;

  g.states = parse_space(need(j, "states", "config"), "config.states", "s");
  g.actions = parse_space(need(j, "actions", "config"), "config.actions", "a");
  const int nx = g.states.size(), na = g.actions.size();

  g.initial = parse_dist(need(j, "initial", "config"), nx, "config.initial");

  const json& jt = need(j, "transition", "config");
  const std::string tkind = need(jt, "kind", "config.transition").get<std::string>();
  if (tkind == "xi_independent") {
    g.transition.kind = TransitionFamily::Kind::xi_independent;
    g.transition.table =
        parse_kernel_table(need(jt, "table", "config.transition"), steps, nx, na, nx,
                           "config.transition.table");
  } else if (tkind == "table_affine") {
    g.transition.kind = TransitionFamily::Kind::table_affine;
    g.transition.table = parse_kernel_table(need(jt, "p0", "config.transition"), steps, nx, na, nx,
                                            "config.transition.p0");
    g.transition.table_hi = parse_kernel_table(need(jt, "p1", "config.transition"), steps, nx, na,
                                               nx, "config.transition.p1");
    g.transition.w0 = need_num(jt, "w0", "config.transition");
    const json& jw = need(jt, "w_coef", "config.transition");
    if (!jw.is_array() || static_cast<int>(jw.size()) != nx)
      throw ValidationError("config.transition: 'w_coef' must have one entry per state");
    g.transition.w_coef = jw.get<std::vector<double>>();
  } else {
    throw ValidationError("config.transition: unknown kind '" + tkind +
                          "' (plugin transitions are host-code only)");
  }

  const json& jc = need(j, "cost", "config");
  const std::string ckind = need(jc, "kind", "config.cost").get<std::string>();
  if (ckind != "table" && ckind != "table_affine")
    throw ValidationError("config.cost: unknown kind '" + ckind + "'");
  g.cost.base = parse_scalar_table(need(jc, "base", "config.cost"), steps, nx, na,
                                   "config.cost.base");
  if (ckind == "table_affine")
    g.cost.mix = parse_mix_table(need(jc, "mix", "config.cost"), steps, nx, na, nx,
                                 "config.cost.mix");
  else if (jc.contains("mix"))
    throw ValidationError("config.cost: kind 'table' does not take a 'mix' term");

  const json& jv = need(j, "terminal", "config");
  const std::string vkind = need(jv, "kind", "config.terminal").get<std::string>();
  if (vkind != "table" && vkind != "table_affine")
    throw ValidationError("config.terminal: unknown kind '" + vkind + "'");
  const json& jvb = need(jv, "base", "config.terminal");
  if (!jvb.is_array() || static_cast<int>(jvb.size()) != nx)
    throw ValidationError("config.terminal: 'base' must have one entry per state");
  g.terminal.base = jvb.get<std::vector<double>>();
  if (vkind == "table_affine") {
    const json& jvm = need(jv, "mix", "config.terminal");
    if (!jvm.is_array() || static_cast<int>(jvm.size()) != nx)
      throw ValidationError("config.terminal: 'mix' must be a [x][y] array");
    for (const auto& row : jvm) {
      if (!row.is_array() || static_cast<int>(row.size()) != nx)
        throw ValidationError("config.terminal: 'mix' must be a [x][y] array");
      g.terminal.mix.push_back(row.get<std::vector<double>>());
    }
  } else if (jv.contains("mix")) {
    throw ValidationError("config.terminal: kind 'table' does not take a 'mix' term");
  }

  const json& je = need(j, "evaluator", "config");
  const std::string ekind = need(je, "kind", "config.evaluator").get<std::string>();
  if (ekind == "expected_sum") {
    g.evaluator.kind = EvaluatorSpec::Kind::expected_sum;
    g.evaluator.kappa = 1.0;
  } else if (ekind == "avar") {
    g.evaluator.kind = EvaluatorSpec::Kind::avar;
    g.evaluator.kappa = je.contains("kappa") ? need_num(je, "kappa", "config.evaluator") : 1.0;
  } else {
    throw ValidationError("config.evaluator: unknown kind '" + ekind + "'");
  }

  const json& jm = need(j, "moduli", "config");
  g.moduli.eta = parse_modulus(need(jm, "eta", "config.moduli"), "config.moduli.eta");
  g.moduli.theta = parse_modulus(need(jm, "theta", "config.moduli"), "config.moduli.theta");
  g.moduli.iota = parse_modulus(need(jm, "iota", "config.moduli"), "config.moduli.iota");
  g.moduli.zeta = parse_modulus(need(jm, "zeta", "config.moduli"), "config.moduli.zeta");
  g.moduli.C0 = jm.contains("C0") ? need_num(jm, "C0", "config.moduli") : cost_sup(g);
  g.moduli.C1 = jm.contains("C1") ? need_num(jm, "C1", "config.moduli") : 1.0;
  const double cbar_default =
      g.evaluator.kind == EvaluatorSpec::Kind::avar ? 1.0 / g.evaluator.kappa : 1.0;
  g.moduli.Cbar = jm.contains("Cbar") ? need_num(jm, "Cbar", "config.moduli") : cbar_default;

  if (j.contains("policy")) {
    PolicySpec p = parse_policy(j.at("policy"), steps, nx, na, nx, "config.policy");
    if (p.kind == PolicySpec::Kind::logit_meanfield && !j.at("policy").contains("theta"))
      p.vartheta = derived_logit_modulus(p, g.states);
    g.policy = std::move(p);
  }
  return g;
}

}  // namespace

Dist transition_dist(const GameSpec& game, int t, int x, const Dist& xi, int a) {
  if (t < 1 || t > game.horizon - 1)
    throw ValidationError("transition_dist: t=" + std::to_string(t) + " outside 1.." +
                          std::to_string(game.horizon - 1));
  if (x < 0 || x >= game.states.size() || a < 0 || a >= game.actions.size())
    throw ValidationError("transition_dist: state or action index out of range");
  if (xi.size() != game.states.size())
    throw ValidationError("transition_dist: xi has wrong dimension");
  const std::size_t row = static_cast<std::size_t>(x) * game.actions.size() + a;
  switch (game.transition.kind) {
    case TransitionFamily::Kind::xi_independent:
      return game.transition.table[static_cast<std::size_t>(t - 1)][row];
    case TransitionFamily::Kind::table_affine: {
      double w = game.transition.w0;
      for (int y = 0; y < xi.size(); ++y) w += game.transition.w_coef[static_cast<std::size_t>(y)] * xi[y];
      w = std::clamp(w, 0.0, 1.0);
      const Dist& p0 = game.transition.table[static_cast<std::size_t>(t - 1)][row];
      const Dist& p1 = game.transition.table_hi[static_cast<std::size_t>(t - 1)][row];
      std::vector<double> out(p0.w.size());
      for (std::size_t y = 0; y < out.size(); ++y) out[y] = (1.0 - w) * p0.w[y] + w * p1.w[y];
      Dist d;
      d.w = std::move(out);
      return d;
    }
    case TransitionFamily::Kind::plugin:
      return make_dist(game.transition.fn(t, x, xi, a).w);
  }
  throw ConsistencyError("unhandled transition kind");
}

double cost_value(const GameSpec& game, int t, int x, const Dist& xi, int a) {
  if (t < 1 || t > game.horizon - 1)
    throw ValidationError("cost_value: t=" + std::to_string(t) + " outside 1.." +
                          std::to_string(game.horizon - 1));
  const std::size_t row = static_cast<std::size_t>(x) * game.actions.size() + a;
  double c = game.cost.base[static_cast<std::size_t>(t - 1)][row];
  if (!game.cost.mix.empty()) {
    const auto& m = game.cost.mix[static_cast<std::size_t>(t - 1)][row];
    for (int y = 0; y < xi.size(); ++y) c += m[static_cast<std::size_t>(y)] * xi[y];
  }
  return c;
}

std::vector<double> terminal_vector(const GameSpec& game, const Dist& xi_T) {
  if (xi_T.size() != game.states.size())
    throw ValidationError("terminal_vector: xi has wrong dimension");
  std::vector<double> v(game.terminal.base);
  if (!game.terminal.mix.empty()) {
    for (std::size_t x = 0; x < v.size(); ++x)
      for (int y = 0; y < xi_T.size(); ++y)
        v[x] += game.terminal.mix[x][static_cast<std::size_t>(y)] * xi_T[y];
  }
  return v;
}

Dist policy_dist(const PolicySpec& policy, int t, int x, const Dist& xi) {
  switch (policy.kind) {
    case PolicySpec::Kind::oblivious_table: {
      if (t < 1 || t > static_cast<int>(policy.table.size()))
        throw ValidationError("policy_dist: t out of range for oblivious table");
      return policy.table[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(x)];
    }
    case PolicySpec::Kind::logit_meanfield: {
      const std::size_t na = policy.mix.size();
      std::vector<double> u(na);
      for (std::size_t a = 0; a < na; ++a) {
        double s = policy.coef_feat * policy.phi[static_cast<std::size_t>(x)][a];
        for (int y = 0; y < xi.size(); ++y)
          s += policy.coef_mix * policy.mix[a][static_cast<std::size_t>(y)] * xi[y];
        u[a] = s;
      }
      const double umax = *std::max_element(u.begin(), u.end());
      double z = 0.0;
      for (auto& v : u) {
        v = std::exp(v - umax);
        z += v;
      }
      for (auto& v : u) v /= z;
      Dist d;
      d.w = std::move(u);
      return d;
    }
    case PolicySpec::Kind::threshold: {
      if (t < 1 || t > static_cast<int>(policy.lo.size()))
        throw ValidationError("policy_dist: t out of range for threshold table");
      const bool low = xi[policy.watch] <= policy.cutoff;
      const auto& tab = low ? policy.lo : policy.hi;
      return tab[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(x)];
    }
    case PolicySpec::Kind::plugin:
      return make_dist(policy.fn(t, x, xi).w);
  }
  throw ConsistencyError("unhandled policy kind");
}

double cost_sup(const GameSpec& game) {
  double s = 0.0;
  const std::size_t rows = static_cast<std::size_t>(game.states.size()) * game.actions.size();
  for (std::size_t ti = 0; ti < game.cost.base.size(); ++ti) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double b = game.cost.base[ti][r];
      if (game.cost.mix.empty()) {
        s = std::max(s, std::abs(b));
      } else {
        for (int y = 0; y < game.states.size(); ++y)
          s = std::max(s, std::abs(b + game.cost.mix[ti][r][static_cast<std::size_t>(y)]));
      }
    }
  }
  return s;
}

double terminal_sup(const GameSpec& game) {
  double s = 0.0;
  for (std::size_t x = 0; x < game.terminal.base.size(); ++x) {
    const double b = game.terminal.base[x];
    if (game.terminal.mix.empty()) {
      s = std::max(s, std::abs(b));
    } else {
      for (std::size_t y = 0; y < game.terminal.mix[x].size(); ++y)
        s = std::max(s, std::abs(b + game.terminal.mix[x][y]));
    }
  }
  return s;
}

void validate_policy(const GameSpec& game, const PolicySpec& policy) {
  const int steps = game.horizon - 1;
  const int nx = game.states.size(), na = game.actions.size();
  auto check_table = [&](const std::vector<std::vector<Dist>>& table, const std::string& where) {
    if (static_cast<int>(table.size()) != steps)
      throw ValidationError(where + ": table must cover steps 1.." + std::to_string(steps));
    for (const auto& step : table) {
      if (static_cast<int>(step.size()) != nx)
        throw ValidationError(where + ": table must cover every state");
      for (const auto& row : step) {
        if (row.size() != na) throw ValidationError(where + ": rows must be action distributions");
        make_dist(row.w);
      }
    }
  };
  switch (policy.kind) {
    case PolicySpec::Kind::oblivious_table:
      check_table(policy.table, "policy '" + policy.name + "'");
      break;
    case PolicySpec::Kind::logit_meanfield: {
      if (static_cast<int>(policy.phi.size()) != nx)
        throw ValidationError("policy '" + policy.name + "': phi must have a row per state");
      for (const auto& row : policy.phi)
        if (static_cast<int>(row.size()) != na)
          throw ValidationError("policy '" + policy.name + "': phi rows must cover actions");
      if (static_cast<int>(policy.mix.size()) != na)
        throw ValidationError("policy '" + policy.name + "': mix must have a row per action");
      for (const auto& row : policy.mix)
        if (static_cast<int>(row.size()) != nx)
          throw ValidationError("policy '" + policy.name + "': mix rows must cover states");
      break;
    }
    case PolicySpec::Kind::threshold:
      if (policy.watch < 0 || policy.watch >= nx)
        throw ValidationError("policy '" + policy.name + "': watch index out of range");
      check_table(policy.lo, "policy '" + policy.name + "' (lo)");
      check_table(policy.hi, "policy '" + policy.name + "' (hi)");
      break;
    case PolicySpec::Kind::plugin:
      if (!policy.fn)
        throw ValidationError("policy '" + policy.name + "': plugin callback missing");
      break;
  }
}

void validate_game(const GameSpec& game) {
  if (game.horizon < 2) throw ValidationError("game: horizon must be >= 2");
  const int steps = game.horizon - 1;
  const int nx = game.states.size(), na = game.actions.size();
  make_space(game.states.labels, game.states.metric);
  make_space(game.actions.labels, game.actions.metric);
  if (game.initial.size() != nx) throw ValidationError("game: initial law has wrong dimension");
  make_dist(game.initial.w);

  const std::size_t rows = static_cast<std::size_t>(nx) * na;
  auto check_kernel = [&](const std::vector<std::vector<Dist>>& table, const char* which) {
    if (static_cast<int>(table.size()) != steps)
      throw ValidationError(std::string("game: ") + which + " must cover steps 1.." +
                            std::to_string(steps));
    for (const auto& step : table) {
      if (step.size() != rows)
        throw ValidationError(std::string("game: ") + which + " must cover every (state, action)");
      for (const auto& row : step) {
        if (row.size() != nx)
          throw ValidationError(std::string("game: ") + which + " rows must be state distributions");
        make_dist(row.w);
      }
    }
  };
  switch (game.transition.kind) {
    case TransitionFamily::Kind::xi_independent:
      check_kernel(game.transition.table, "transition table");
      break;
    case TransitionFamily::Kind::table_affine: {
      check_kernel(game.transition.table, "transition p0");
      check_kernel(game.transition.table_hi, "transition p1");
      if (static_cast<int>(game.transition.w_coef.size()) != nx)
        throw ValidationError("game: transition w_coef must have one entry per state");
      // Rows are convex mixtures of two stochastic rows, so checking every
      // simplex vertex certifies the whole simplex.
      for (int y = 0; y < nx; ++y) {
        const Dist vertex = dirac(nx, y);
        for (int t = 1; t <= steps; ++t)
          for (int x = 0; x < nx; ++x)
            for (int a = 0; a < na; ++a) make_dist(transition_dist(game, t, x, vertex, a).w);
      }
      break;
    }
    case TransitionFamily::Kind::plugin:
      if (!game.transition.fn) throw ValidationError("game: plugin transition callback missing");
      break;
  }

  if (game.cost.base.size() != static_cast<std::size_t>(steps))
    throw ValidationError("game: cost table must cover steps 1.." + std::to_string(steps));
  for (const auto& step : game.cost.base)
    if (step.size() != rows)
      throw ValidationError("game: cost table must cover every (state, action)");
  if (!game.cost.mix.empty()) {
    if (game.cost.mix.size() != game.cost.base.size())
      throw ValidationError("game: cost mix must match the base table steps");
    for (const auto& step : game.cost.mix) {
      if (step.size() != rows)
        throw ValidationError("game: cost mix must cover every (state, action)");
      for (const auto& row : step)
        if (static_cast<int>(row.size()) != nx)
          throw ValidationError("game: cost mix rows must have one entry per state");
    }
  }
  if (static_cast<int>(game.terminal.base.size()) != nx)
    throw ValidationError("game: terminal base must have one entry per state");
  if (!game.terminal.mix.empty()) {
    if (static_cast<int>(game.terminal.mix.size()) != nx)
      throw ValidationError("game: terminal mix must have a row per state");
    for (const auto& row : game.terminal.mix)
      if (static_cast<int>(row.size()) != nx)
        throw ValidationError("game: terminal mix rows must have one entry per state");
  }

  if (game.evaluator.kind == EvaluatorSpec::Kind::avar &&
      (!(game.evaluator.kappa > 0.0) || game.evaluator.kappa > 1.0))
    throw ValidationError("game: avar kappa must lie in (0, 1]");

  const double c0 = cost_sup(game);
  if (game.moduli.C0 < c0 - 1e-9)
    throw ValidationError("game: declared C0 " + std::to_string(game.moduli.C0) +
                          " is below the cost bound " + std::to_string(c0));
  if (game.moduli.C1 < 1.0 - 1e-12)
    throw ValidationError("game: C1 must be >= 1 for the score families in use");
  const double cbar_needed =
      game.evaluator.kind == EvaluatorSpec::Kind::avar ? 1.0 / game.evaluator.kappa : 1.0;
  if (game.moduli.Cbar < cbar_needed - 1e-9)
    throw ValidationError("game: declared Cbar is below the evaluator's contraction constant");

  if (game.policy) validate_policy(game, *game.policy);
}

GameSpec load_game(const std::string& config_text) {
  json j;
  try {
    j = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  GameSpec g = game_from_json(j);
  validate_game(g);
  return g;
}

std::string serialize_game(const GameSpec& game) {
  if (game.transition.kind == TransitionFamily::Kind::plugin)
    throw ValidationError("serialize_game: plugin transitions cannot be serialized");
  if (game.policy && game.policy->kind == PolicySpec::Kind::plugin)
    throw ValidationError("serialize_game: plugin policies cannot be serialized");
  json j;
  j["name"] = game.name;
  j["horizon"] = game.horizon;
  j["states"] = {{"labels", game.states.labels}, {"metric", json::array()}};
  j["actions"] = {{"labels", game.actions.labels}, {"metric", json::array()}};
  for (int i = 0; i < game.states.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < game.states.size(); ++k) row.push_back(game.states.dist(i, k));
    j["states"]["metric"].push_back(std::move(row));
  }
  for (int i = 0; i < game.actions.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < game.actions.size(); ++k) row.push_back(game.actions.dist(i, k));
    j["actions"]["metric"].push_back(std::move(row));
  }
  j["initial"] = game.initial.w;

  const int nx = game.states.size(), na = game.actions.size();
  auto kernel_json = [&](const std::vector<std::vector<Dist>>& table) {
    json jt = json::array();
    for (const auto& step : table) {
      json js = json::array();
      for (int x = 0; x < nx; ++x) {
        json jx = json::array();
        for (int a = 0; a < na; ++a)
          jx.push_back(step[static_cast<std::size_t>(x) * na + a].w);
        js.push_back(std::move(jx));
      }
      jt.push_back(std::move(js));
    }
    return jt;
  };
  if (game.transition.kind == TransitionFamily::Kind::xi_independent) {
    j["transition"] = {{"kind", "xi_independent"}, {"table", kernel_json(game.transition.table)}};
  } else {
    j["transition"] = {{"kind", "table_affine"},
                       {"p0", kernel_json(game.transition.table)},
                       {"p1", kernel_json(game.transition.table_hi)},
                       {"w0", game.transition.w0},
                       {"w_coef", game.transition.w_coef}};
  }

  auto scalar_json = [&](const std::vector<std::vector<double>>& table) {
    json jt = json::array();
    for (const auto& step : table) {
      json js = json::array();
      for (int x = 0; x < nx; ++x) {
        json jx = json::array();
        for (int a = 0; a < na; ++a) jx.push_back(step[static_cast<std::size_t>(x) * na + a]);
        js.push_back(std::move(jx));
      }
      jt.push_back(std::move(js));
    }
    return jt;
  };
  j["cost"] = {{"kind", game.cost.mix.empty() ? "table" : "table_affine"},
               {"base", scalar_json(game.cost.base)}};
  if (!game.cost.mix.empty()) {
    json jm = json::array();
    for (const auto& step : game.cost.mix) {
      json js = json::array();
      for (int x = 0; x < nx; ++x) {
        json jx = json::array();
        for (int a = 0; a < na; ++a) jx.push_back(step[static_cast<std::size_t>(x) * na + a]);
        js.push_back(std::move(jx));
      }
      jm.push_back(std::move(js));
    }
    j["cost"]["mix"] = std::move(jm);
  }

  j["terminal"] = {{"kind", game.terminal.mix.empty() ? "table" : "table_affine"},
                   {"base", game.terminal.base}};
  if (!game.terminal.mix.empty()) j["terminal"]["mix"] = game.terminal.mix;

  if (game.evaluator.kind == EvaluatorSpec::Kind::expected_sum) {
    j["evaluator"] = {{"kind", "expected_sum"}};
  } else {
    j["evaluator"] = {{"kind", "avar"}, {"kappa", game.evaluator.kappa}};
  }

  j["moduli"] = {{"eta", modulus_json(game.moduli.eta)},
                 {"theta", modulus_json(game.moduli.theta)},
                 {"iota", modulus_json(game.moduli.iota)},
                 {"zeta", modulus_json(game.moduli.zeta)},
                 {"C0", game.moduli.C0},
                 {"C1", game.moduli.C1},
                 {"Cbar", game.moduli.Cbar}};

  if (game.policy) j["policy"] = policy_json(*game.policy, game.horizon - 1);
  return j.dump(2);
}

namespace {

std::vector<std::vector<Dist>> broadcast_rows(std::vector<Dist> rows, int steps) {
  std::vector<std::vector<Dist>> out;
  for (int t = 0; t < steps; ++t) out.push_back(rows);
  return out;
}

GameSpec make_no_one_get_it() {
  GameSpec g;
  g.name = "no_one_get_it";
  g.horizon = 3;
  g.states = make_space({"ground", "up"}, {0, 1, 1, 0});
  g.actions = make_space({"stay", "go"}, {0, 1, 1, 0});
  g.initial = dirac(2, 0);

  // From the ground the chosen action is the next state; the upper level is
  // absorbing whatever the action says.
  g.transition.kind = TransitionFamily::Kind::xi_independent;
  g.transition.table = broadcast_rows(
      {make_dist({1, 0}), make_dist({0, 1}), make_dist({0, 1}), make_dist({0, 1})}, 2);

  // Reaching the upper level by t=2 pays a reward of 1; nothing else accrues
  // until the terminal crowding penalty of 10 x (mass on your own level).
  g.cost.base = {{0, 0, 0, 0}, {0, 0, -1, -1}};
  g.terminal.base = {0, 0};
  g.terminal.mix = {{10, 0}, {0, 10}};

  g.evaluator.kind = EvaluatorSpec::Kind::expected_sum;
  g.moduli.eta = linear_modulus(1.0, 1.0);
  g.moduli.theta = infinite_modulus();
  g.moduli.iota = linear_modulus(20.0, 10.0);
  g.moduli.zeta = zero_modulus();
  g.moduli.C0 = 1.0;

  // Stay down at t=1. At t=2 flip a fair coin if nobody is up yet, otherwise
  // pile onto the upper level. Discontinuous at mass zero, hence the infinite
  // continuity marker.
  PolicySpec p;
  p.kind = PolicySpec::Kind::threshold;
  p.name = "herd_on_sight";
  p.watch = 1;
  p.cutoff = 0.0;
  p.lo = {{make_dist({1, 0}), make_dist({1, 0})},
          {make_dist({0.5, 0.5}), make_dist({1, 0})}};
  p.hi = {{make_dist({1, 0}), make_dist({1, 0})},
          {make_dist({0, 1}), make_dist({1, 0})}};
  p.vartheta = infinite_modulus();
  g.policy = std::move(p);
  return g;
}

GameSpec make_chain() {
  GameSpec g;
  g.name = "chain";
  g.horizon = 4;
  g.states = make_space({"s0", "s1", "s2"}, {0, 2, 2, 2, 0, 2, 2, 2, 0});
  g.actions = make_space({"hold", "step"}, {0, 2, 2, 0});
  g.initial = dirac(3, 0);

  // hold keeps the state, step advances around the 3-cycle; no population
  // coupling anywhere, so the mean field optimum is plain dynamic programming.
  g.transition.kind = TransitionFamily::Kind::xi_independent;
  g.transition.table = broadcast_rows({make_dist({1, 0, 0}), make_dist({0, 1, 0}),
                                       make_dist({0, 1, 0}), make_dist({0, 0, 1}),
                                       make_dist({0, 0, 1}), make_dist({1, 0, 0})},
                                      3);

  // Holding cost by state plus a small surcharge for stepping; tuned so the
  // optimal actions (step, step, hold) are strict at every reachable state.
  g.cost.base = {{0.8, 0.9, 0.4, 0.5, 0.1, 0.2},
                 {0.8, 0.9, 0.4, 0.5, 0.1, 0.2},
                 {0.8, 0.9, 0.4, 0.5, 0.1, 0.2}};
  g.terminal.base = {0.6, 0.3, 0.0};

  g.evaluator.kind = EvaluatorSpec::Kind::expected_sum;
  g.moduli.eta = linear_modulus(0.5, 1.0);
  g.moduli.theta = zero_modulus();
  g.moduli.iota = zero_modulus();
  g.moduli.zeta = linear_modulus(0.05, 0.1);
  g.moduli.C0 = 0.9;

  PolicySpec p;
  p.kind = PolicySpec::Kind::oblivious_table;
  p.name = "uniform";
  p.table = std::vector<std::vector<Dist>>(
      3, {make_dist({0.5, 0.5}), make_dist({0.5, 0.5}), make_dist({0.5, 0.5})});
  p.vartheta = zero_modulus();
  g.policy = std::move(p);
  return g;
}

GameSpec make_crowd() {
  GameSpec g;
  g.name = "crowd";
  g.horizon = 3;
  g.states = make_space({"L", "R"}, {0, 2, 2, 0});
  g.actions = make_space({"goL", "goR"}, {0, 2, 2, 0});
  g.initial = make_dist({0.7, 0.3});

  // Deterministic relocation to the chosen side.
  g.transition.kind = TransitionFamily::Kind::xi_independent;
  g.transition.table = broadcast_rows(
      {make_dist({1, 0}), make_dist({0, 1}), make_dist({1, 0}), make_dist({0, 1})}, 2);

  // Moving costs 0.3, the right side charges a 0.05 premium, and the chosen
  // side adds a congestion term of 0.25 x its current occupancy.
  g.cost.base = {{0.0, 0.35, 0.3, 0.05}, {0.0, 0.35, 0.3, 0.05}};
  g.cost.mix = {{{0.25, 0}, {0, 0.25}, {0.25, 0}, {0, 0.25}},
                {{0.25, 0}, {0, 0.25}, {0.25, 0}, {0, 0.25}}};
  g.terminal.base = {0, 0};
  g.terminal.mix = {{0.2, 0}, {0, 0.2}};

  g.evaluator.kind = EvaluatorSpec::Kind::expected_sum;
  g.moduli.eta = linear_modulus(0.5, 1.0);
  g.moduli.theta = linear_modulus(1.0, 1.0);
  g.moduli.iota = linear_modulus(0.2, 0.2);
  g.moduli.zeta = linear_modulus(0.3, 0.6);
  g.moduli.C0 = 0.6;

  // Smooth reference behavior: mildly prefer staying put, shy away from the
  // currently crowded side.
  PolicySpec p;
  p.kind = PolicySpec::Kind::logit_meanfield;
  p.name = "congestion_logit";
  p.coef_feat = 0.5;
  p.coef_mix = -1.0;
  p.phi = {{1.0, 0.0}, {0.0, 1.0}};
  p.mix = {{1.0, 0.0}, {0.0, 1.0}};
  p.vartheta = linear_modulus(1.0, 1.0);
  g.policy = std::move(p);
  return g;
}

GameSpec make_four_point() {
  GameSpec g;
  g.name = "four_point";
  g.horizon = 3;
  g.states = make_space({"p0", "p1", "p2", "p3"},
                        {0, 2, 2, 2, 2, 0, 2, 2, 2, 2, 0, 2, 2, 2, 2, 0});
  g.actions = make_space({"stay", "cycle"}, {0, 2, 2, 0});
  g.initial = uniform_dist(4);

  g.transition.kind = TransitionFamily::Kind::xi_independent;
  g.transition.table = broadcast_rows({make_dist({1, 0, 0, 0}), make_dist({0, 1, 0, 0}),
                                       make_dist({0, 1, 0, 0}), make_dist({0, 0, 1, 0}),
                                       make_dist({0, 0, 1, 0}), make_dist({0, 0, 0, 1}),
                                       make_dist({0, 0, 0, 1}), make_dist({1, 0, 0, 0})},
                                      2);

  g.cost.base = {{0, 0.1, 0, 0.1, 0, 0.1, 0, 0.1}, {0, 0.1, 0, 0.1, 0, 0.1, 0, 0.1}};
  g.terminal.base = {0.3, 0.1, 0.2, 0.0};
  g.terminal.mix = {{0.1, 0, 0, 0}, {0, 0.1, 0, 0}, {0, 0, 0.1, 0}, {0, 0, 0, 0.1}};

  g.evaluator.kind = EvaluatorSpec::Kind::expected_sum;
  g.moduli.eta = linear_modulus(0.5, 1.0);
  g.moduli.theta = zero_modulus();
  g.moduli.iota = linear_modulus(0.1, 0.1);
  g.moduli.zeta = linear_modulus(0.05, 0.1);
  g.moduli.C0 = 0.2;

  PolicySpec p;
  p.kind = PolicySpec::Kind::oblivious_table;
  p.name = "uniform";
  p.table = std::vector<std::vector<Dist>>(
      2, {make_dist({0.5, 0.5}), make_dist({0.5, 0.5}), make_dist({0.5, 0.5}),
          make_dist({0.5, 0.5})});
  p.vartheta = zero_modulus();
  g.policy = std::move(p);
  return g;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"no_one_get_it", "chain", "crowd", "four_point"};
  return names;
}

GameSpec builtin_game(const std::string& name) {
  GameSpec g;
  if (name == "no_one_get_it") {
    g = make_no_one_get_it();
  } else if (name == "chain") {
    g = make_chain();
  } else if (name == "crowd") {
    g = make_crowd();
  } else if (name == "four_point") {
    g = make_four_point();
  } else {
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("unknown built-in game '" + name + "' (known: " + known + ")");
  }
  validate_game(g);
  return g;
}

}  // namespace mfg
