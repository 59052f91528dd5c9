#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "novikov/cover.hpp"

namespace novikov {

/// Seeded generator with a fixed algorithm, so scenarios and tests replay
/// identically across platforms (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }
    /// Uniform in [lo, hi].
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }
    bool chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(v.size()) - 1))];
    }

private:
    std::mt19937_64 eng_;
};

struct CoverSpec {
    std::int64_t k = 2;
    std::vector<std::int64_t> weights;
    std::int64_t torsion_weight = 0;

    CyclicQuotient quotient(const GradedGroup& g) const {
        CyclicQuotient m{k, weights, torsion_weight};
        m.free_weights.resize(g.rank(), 0);
        return m;
    }
    friend bool operator==(const CoverSpec&, const CoverSpec&) = default;
};

struct BoundaryEntry {
    std::string from, to;
    NovikovSeries value;

    friend bool operator==(const BoundaryEntry&, const BoundaryEntry&) = default;
};

/// One scenario file: a group, optionally a complex, closed-orbit data in one of
/// three forms, a move script and a cover request.
struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    GroupPtr group;
    std::optional<Grade> truncation;
    bool exact = false;  // complex over Z[H] with polynomial entries
    std::optional<Ambiguity> ambiguity;
    std::vector<Generator> generators;
    std::vector<BoundaryEntry> boundary;
    std::optional<std::vector<ClosedOrbit>> orbits;
    std::optional<Grade> orbit_completeness;
    std::optional<std::vector<OrbitFactor>> factors;
    std::optional<std::vector<IntMatrix>> fiber_maps;
    std::vector<BifurcationMove> moves;
    std::optional<CoverSpec> cover;
    std::optional<std::vector<std::int64_t>> summands;

    Ambiguity effective_ambiguity() const { return ambiguity.value_or(Ambiguity::kTranslation); }

    friend bool operator==(const Scenario& a, const Scenario& b) {
        return a.name == b.name && a.seed == b.seed && same_group(a.group, b.group) && a.truncation == b.truncation &&
               a.exact == b.exact && a.ambiguity == b.ambiguity && a.generators == b.generators &&
               a.boundary == b.boundary && a.orbits == b.orbits && a.orbit_completeness == b.orbit_completeness &&
               a.factors == b.factors && a.fiber_maps == b.fiber_maps && a.moves == b.moves && a.cover == b.cover &&
               a.summands == b.summands;
    }
};

/// Truncation precedence: explicit flag, then the scenario, then NOVIKOV_DEFAULT_R, then 16.
inline Grade resolve_truncation(const std::optional<Grade>& flag, const Scenario& sc) {
    Grade r(16);
    if (flag) r = *flag;
    else if (sc.truncation) r = *sc.truncation;
    else if (const char* env = std::getenv("NOVIKOV_DEFAULT_R"); env && *env) r = Grade::parse(env);
    if (r.sign() <= 0) throw ParseError("truncation must be positive, got " + r.str());
    return r;
}

namespace detail {

using json = nlohmann::ordered_json;

inline std::string ctx(const std::string& where, const std::string& what) { return where + ": " + what; }

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(ctx(where, std::string("missing field '") + key + "'"));
    return j.at(key);
}

inline std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(ctx(where, "expected a string"));
    return j.get<std::string>();
}

inline std::int64_t get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ParseError(ctx(where, "expected an integer"));
    return j.get<std::int64_t>();
}

inline Grade get_grade(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Grade(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return Grade::parse(j.get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(ctx(where, e.what()));
        }
    }
    throw ParseError(ctx(where, "expected a grade (integer or string)"));
}

inline json grade_json(const Grade& g) {
    if (g.is_rational() && is_integer(g.rational_part())) return to_int64(g.rational_part().get_num());
    return g.str();
}

inline NovikovSeries get_series(const json& j, const GroupPtr& group, const std::string& where) {
    std::string text = get_string(j, where);
    try {
        return parse_series(text, group);
    } catch (const ParseError& e) {
        throw ParseError(ctx(where, e.what()));
    }
}

inline GroupElement get_element(const json& j, const GroupPtr& group, const std::string& where) {
    NovikovSeries s = get_series(j, group, where);
    if (!s.is_exact() || s.terms().size() != 1 || s.terms()[0].coeff != CyclotomicNumber(Rational(1)))
        throw ParseError(ctx(where, "expected a group element (a monomial with coefficient 1)"));
    return s.terms()[0].element;
}

inline std::string element_text(const GradedGroup& group, const GroupElement& h) {
    std::string m = novikov::detail::render_monomial(group, h);
    return m.empty() ? "1" : m;
}

inline Ambiguity get_ambiguity(const json& j, const std::string& where) {
    std::string s = get_string(j, where);
    if (s == "pm1") return Ambiguity::kSign;
    if (s == "pmH") return Ambiguity::kTranslation;
    throw ParseError(ctx(where, "ambiguity must be \"pm1\" or \"pmH\""));
}

inline int get_mu(const json& j, const std::string& where) {
    std::int64_t mu = get_int(j, where);
    if (mu != 0 && mu != 1) throw ParseError(ctx(where, "mu must be 0 or 1"));
    return static_cast<int>(mu);
}

inline OrbitFactor get_factor(const json& j, const GroupPtr& group, const std::string& where) {
    OrbitFactor f;
    f.cls = get_element(require(j, "class", where), group, where + ".class");
    try {
        f.type = parse_factor_type(get_string(require(j, "type", where), where + ".type"));
    } catch (const ParseError& e) {
        throw ParseError(ctx(where, e.what()));
    }
    return f;
}

inline std::vector<std::pair<std::string, NovikovSeries>> get_named_series(const json& j, const GroupPtr& group,
                                                                          const std::string& where) {
    std::vector<std::pair<std::string, NovikovSeries>> out;
    if (!j.is_array()) throw ParseError(ctx(where, "expected an array of [name, series] pairs"));
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string w = where + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) throw ParseError(ctx(w, "expected [name, series]"));
        out.emplace_back(get_string(j[i][0], w), get_series(j[i][1], group, w));
    }
    return out;
}

inline BifurcationMove parse_move(const json& j, const GroupPtr& group, const std::string& where) {
    std::string kind = get_string(require(j, "move", where), where + ".move");
    if (kind == "noop") {
        moves::NoOp m;
        if (j.contains("kind")) m.kind = get_string(j["kind"], where + ".kind");
        if (m.kind != "flow-line-cancel" && m.kind != "orbit-cancel")
            throw ParseError(ctx(where, "noop kind must be flow-line-cancel or orbit-cancel"));
        return m;
    }
    if (kind == "slide") {
        moves::Slide m;
        m.p = get_string(require(j, "p", where), where + ".p");
        m.q = get_string(require(j, "q", where), where + ".q");
        if (j.contains("sign")) m.sign = static_cast<int>(get_int(j["sign"], where + ".sign"));
        if (m.sign != 1 && m.sign != -1) throw ParseError(ctx(where, "slide sign must be 1 or -1"));
        if (j.contains("h")) m.h = get_element(j["h"], group, where + ".h");
        return m;
    }
    if (kind == "self_slide") {
        moves::SelfSlide m;
        m.p = get_string(require(j, "p", where), where + ".p");
        m.x = get_series(require(j, "x", where), group, where + ".x");
        m.h = j.contains("h") ? get_element(j["h"], group, where + ".h") : self_slide_variable(m.x);
        return m;
    }
    if (kind == "death") {
        moves::Death m;
        m.p = get_string(require(j, "p", where), where + ".p");
        m.q = get_string(require(j, "q", where), where + ".q");
        if (j.contains("mu")) m.mu = get_mu(j["mu"], where + ".mu");
        return m;
    }
    if (kind == "birth") {
        moves::Birth m;
        m.p = get_string(require(j, "p", where), where + ".p");
        m.q = get_string(require(j, "q", where), where + ".q");
        m.degree = static_cast<int>(get_int(require(j, "degree", where), where + ".degree"));
        if (j.contains("mu")) m.mu = get_mu(j["mu"], where + ".mu");
        m.eta = j.contains("eta") ? get_series(j["eta"], group, where + ".eta") : NovikovSeries(group);
        if (j.contains("v")) m.v = get_named_series(j["v"], group, where + ".v");
        if (j.contains("w")) m.w = get_named_series(j["w"], group, where + ".w");
        if (j.contains("p_lift")) m.p_lift = get_element(j["p_lift"], group, where + ".p_lift");
        if (j.contains("q_lift")) m.q_lift = get_element(j["q_lift"], group, where + ".q_lift");
        return m;
    }
    if (kind == "tamper_zeta") return moves::TamperZeta{get_factor(j, group, where)};
    throw ParseError(ctx(where, "unknown move '" + kind + "'"));
}

inline json move_json(const BifurcationMove& move, const GradedGroup& group) {
    struct V {
        const GradedGroup& g;
        json operator()(const moves::NoOp& m) const { return {{"move", "noop"}, {"kind", m.kind}}; }
        json operator()(const moves::Slide& m) const {
            return {{"move", "slide"}, {"p", m.p}, {"q", m.q}, {"sign", m.sign}, {"h", element_text(g, m.h)}};
        }
        json operator()(const moves::SelfSlide& m) const {
            return {{"move", "self_slide"}, {"p", m.p}, {"x", render_series(m.x)}, {"h", element_text(g, m.h)}};
        }
        json operator()(const moves::Death& m) const {
            return {{"move", "death"}, {"p", m.p}, {"q", m.q}, {"mu", m.mu}};
        }
        json operator()(const moves::Birth& m) const {
            json v = json::array(), w = json::array();
            for (const auto& [n, s] : m.v) v.push_back({n, render_series(s)});
            for (const auto& [n, s] : m.w) w.push_back({n, render_series(s)});
            return {{"move", "birth"}, {"p", m.p},   {"q", m.q}, {"degree", m.degree},
                    {"mu", m.mu},      {"eta", render_series(m.eta)},
                    {"v", v},          {"w", w},     {"p_lift", element_text(g, m.p_lift)},
                    {"q_lift", element_text(g, m.q_lift)}};
        }
        json operator()(const moves::TamperZeta& m) const {
            return {{"move", "tamper_zeta"}, {"class", element_text(g, m.factor.cls)},
                    {"type", factor_type_name(m.factor.type)}};
        }
    };
    return std::visit(V{group}, move);
}

/// Walks the script over the generator names, so references to generators
/// created or removed by earlier moves are checked too.
inline void check_script_names(const Scenario& sc) {
    std::map<std::string, int> live;
    for (const auto& g : sc.generators) live[g.name] = g.degree;
    auto need = [&](const std::string& n, std::size_t k) {
        if (!live.count(n))
            throw ParseError("moves[" + std::to_string(k) + "]: unknown generator '" + n + "'");
    };
    for (std::size_t k = 0; k < sc.moves.size(); ++k) {
        const auto& m = sc.moves[k];
        if (auto* s = std::get_if<moves::Slide>(&m)) {
            need(s->p, k), need(s->q, k);
        } else if (auto* s = std::get_if<moves::SelfSlide>(&m)) {
            need(s->p, k);
        } else if (auto* s = std::get_if<moves::Death>(&m)) {
            need(s->p, k), need(s->q, k);
            live.erase(s->p), live.erase(s->q);
        } else if (auto* s = std::get_if<moves::Birth>(&m)) {
            for (const auto& [n, _] : s->v) need(n, k);
            for (const auto& [n, _] : s->w) need(n, k);
            if (live.count(s->p) || live.count(s->q) || s->p == s->q)
                throw ParseError("moves[" + std::to_string(k) + "]: birth generator names must be new");
            live[s->p] = s->degree, live[s->q] = s->degree - 1;
        }
    }
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::ordered_json& j) {
    using detail::get_int;
    using detail::get_string;
    using detail::require;
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario sc;
    if (j.contains("name")) sc.name = get_string(j["name"], "name");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ParseError("seed: expected a nonnegative integer");
        sc.seed = j["seed"].get<std::uint64_t>();
    }

    std::vector<Grade> weights{Grade(1)};
    std::int64_t torsion = 0;
    if (j.contains("group")) {
        const auto& g = j["group"];
        if (!g.is_object()) throw ParseError("group: expected an object");
        std::int64_t rank = g.contains("free_rank") ? get_int(g["free_rank"], "group.free_rank") : 1;
        if (rank < 0 || rank > 2) throw ParseError("group.free_rank must be 0, 1 or 2");
        weights.clear();
        if (g.contains("weights")) {
            if (!g["weights"].is_array()) throw ParseError("group.weights: expected an array");
            for (std::size_t i = 0; i < g["weights"].size(); ++i)
                weights.push_back(detail::get_grade(g["weights"][i], "group.weights[" + std::to_string(i) + "]"));
        } else {
            for (std::int64_t i = 0; i < rank; ++i) weights.push_back(Grade(1));
        }
        if (static_cast<std::int64_t>(weights.size()) != rank)
            throw ParseError("group.weights must have free_rank entries");
        if (g.contains("torsion")) torsion = get_int(g["torsion"], "group.torsion");
    }
    try {
        sc.group = GradedGroup::make(weights, torsion);
    } catch (const MathError& e) {
        throw ParseError(std::string("group: ") + e.what());
    }
    const auto& G = sc.group;

    if (j.contains("truncation")) {
        sc.truncation = detail::get_grade(j["truncation"], "truncation");
        if (sc.truncation->sign() <= 0) throw ParseError("truncation must be positive");
    }
    if (j.contains("exact")) {
        if (!j["exact"].is_boolean()) throw ParseError("exact: expected true or false");
        sc.exact = j["exact"].get<bool>();
    }
    if (j.contains("ambiguity")) sc.ambiguity = detail::get_ambiguity(j["ambiguity"], "ambiguity");

    if (j.contains("complex")) {
        const auto& c = j["complex"];
        std::map<std::string, int> degree;
        if (c.contains("generators")) {
            const auto& gens = c["generators"];
            if (!gens.is_array()) throw ParseError("complex.generators: expected an array");
            for (std::size_t i = 0; i < gens.size(); ++i) {
                std::string w = "complex.generators[" + std::to_string(i) + "]";
                Generator g;
                g.name = get_string(require(gens[i], "name", w), w + ".name");
                g.degree = static_cast<int>(get_int(require(gens[i], "degree", w), w + ".degree"));
                if (gens[i].contains("lift")) g.lift = detail::get_element(gens[i]["lift"], G, w + ".lift");
                if (g.name.empty()) throw ParseError(w + ": empty generator name");
                if (!degree.emplace(g.name, g.degree).second) throw ParseError(w + ": duplicate generator '" + g.name + "'");
                sc.generators.push_back(std::move(g));
            }
        }
        if (c.contains("boundary")) {
            const auto& bd = c["boundary"];
            if (!bd.is_array()) throw ParseError("complex.boundary: expected an array");
            std::set<std::pair<std::string, std::string>> seen;
            for (std::size_t i = 0; i < bd.size(); ++i) {
                std::string w = "complex.boundary[" + std::to_string(i) + "]";
                BoundaryEntry e;
                e.from = get_string(require(bd[i], "from", w), w + ".from");
                e.to = get_string(require(bd[i], "to", w), w + ".to");
                e.value = detail::get_series(require(bd[i], "value", w), G, w + ".value");
                if (!degree.count(e.from)) throw ParseError(w + ": unknown generator '" + e.from + "'");
                if (!degree.count(e.to)) throw ParseError(w + ": unknown generator '" + e.to + "'");
                if (degree[e.to] != degree[e.from] - 1)
                    throw ParseError(w + ": '" + e.to + "' is not one degree below '" + e.from + "'");
                if (!seen.insert({e.from, e.to}).second) throw ParseError(w + ": repeated entry");
                sc.boundary.push_back(std::move(e));
            }
        }
    }

    if (j.contains("orbits")) {
        const auto& os = j["orbits"];
        if (!os.is_array()) throw ParseError("orbits: expected an array");
        std::vector<ClosedOrbit> list;
        for (std::size_t i = 0; i < os.size(); ++i) {
            std::string w = "orbits[" + std::to_string(i) + "]";
            ClosedOrbit o;
            o.cls = detail::get_element(require(os[i], "class", w), G, w + ".class");
            o.period = get_int(require(os[i], "period", w), w + ".period");
            o.sign = static_cast<int>(get_int(require(os[i], "sign", w), w + ".sign"));
            if (os[i].contains("count")) o.count = get_int(os[i]["count"], w + ".count");
            if (o.period < 1) throw ParseError(w + ": period must be positive");
            if (o.sign != 1 && o.sign != -1) throw ParseError(w + ": sign must be 1 or -1");
            if (o.count < 1) throw ParseError(w + ": count must be positive");
            list.push_back(o);
        }
        sc.orbits = std::move(list);
    }
    if (j.contains("orbit_completeness")) {
        sc.orbit_completeness = detail::get_grade(j["orbit_completeness"], "orbit_completeness");
        if (sc.orbit_completeness->sign() <= 0) throw ParseError("orbit_completeness must be positive");
    }
    if (j.contains("factors")) {
        const auto& fs = j["factors"];
        if (!fs.is_array()) throw ParseError("factors: expected an array");
        std::vector<OrbitFactor> list;
        for (std::size_t i = 0; i < fs.size(); ++i)
            list.push_back(detail::get_factor(fs[i], G, "factors[" + std::to_string(i) + "]"));
        sc.factors = std::move(list);
    }
    if (j.contains("fiber_maps")) {
        const auto& fm = j["fiber_maps"];
        if (!fm.is_array()) throw ParseError("fiber_maps: expected an array of matrices");
        std::vector<IntMatrix> maps;
        for (std::size_t i = 0; i < fm.size(); ++i) {
            std::string w = "fiber_maps[" + std::to_string(i) + "]";
            if (!fm[i].is_array()) throw ParseError(w + ": expected a matrix");
            IntMatrix m;
            for (std::size_t r = 0; r < fm[i].size(); ++r) {
                if (!fm[i][r].is_array() || fm[i][r].size() != fm[i].size())
                    throw ParseError(w + ": matrix must be square");
                std::vector<Integer> row;
                for (std::size_t c = 0; c < fm[i][r].size(); ++c)
                    row.emplace_back(get_int(fm[i][r][c], w + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
                m.push_back(std::move(row));
            }
            maps.push_back(std::move(m));
        }
        if (G->rank() != 1 || G->torsion_order() != 0)
            throw ParseError("fiber_maps need the group Z (free_rank 1, no torsion)");
        sc.fiber_maps = std::move(maps);
    }
    if (j.contains("moves")) {
        const auto& ms = j["moves"];
        if (!ms.is_array()) throw ParseError("moves: expected an array");
        for (std::size_t i = 0; i < ms.size(); ++i)
            sc.moves.push_back(detail::parse_move(ms[i], G, "moves[" + std::to_string(i) + "]"));
        detail::check_script_names(sc);
    }
    if (j.contains("cover")) {
        const auto& c = j["cover"];
        CoverSpec cs;
        if (c.contains("k")) cs.k = get_int(c["k"], "cover.k");
        if (cs.k < 1) throw ParseError("cover.k must be positive");
        if (c.contains("weights")) {
            if (!c["weights"].is_array()) throw ParseError("cover.weights: expected an array");
            for (std::size_t i = 0; i < c["weights"].size(); ++i)
                cs.weights.push_back(get_int(c["weights"][i], "cover.weights[" + std::to_string(i) + "]"));
        }
        if (cs.weights.size() > G->rank()) throw ParseError("cover.weights has more entries than free_rank");
        if (c.contains("torsion_weight")) cs.torsion_weight = get_int(c["torsion_weight"], "cover.torsion_weight");
        sc.cover = std::move(cs);
    }
    if (j.contains("summands")) {
        if (!j["summands"].is_array()) throw ParseError("summands: expected an array");
        std::vector<std::int64_t> ds;
        auto split = split_group_algebra(G->torsion_order());
        for (std::size_t i = 0; i < j["summands"].size(); ++i) {
            std::int64_t d = get_int(j["summands"][i], "summands[" + std::to_string(i) + "]");
            bool known = false;
            for (const auto& s : split.summands) known = known || s.order == d;
            if (!known) throw ParseError("summands[" + std::to_string(i) + "]: no summand Q(zeta_" + std::to_string(d) + ")");
            ds.push_back(d);
        }
        sc.summands = std::move(ds);
    }
    if (sc.exact && (sc.orbits || sc.factors || sc.fiber_maps || !sc.moves.empty()))
        throw ParseError("an exact scenario carries a complex only (no orbits, factors, fiber maps or moves)");
    return sc;
}

inline Scenario parse_scenario(std::string_view text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
    using detail::json;
    const auto& G = *sc.group;
    json j;
    j["name"] = sc.name;
    j["seed"] = sc.seed;
    json weights = json::array();
    for (const auto& w : G.weights()) weights.push_back(detail::grade_json(w));
    j["group"] = {{"free_rank", G.rank()}, {"weights", weights}, {"torsion", G.torsion_order()}};
    if (sc.truncation) j["truncation"] = detail::grade_json(*sc.truncation);
    if (sc.exact) j["exact"] = true;
    if (sc.ambiguity) j["ambiguity"] = ambiguity_name(*sc.ambiguity);
    json gens = json::array(), bd = json::array();
    for (const auto& g : sc.generators) {
        json e = {{"name", g.name}, {"degree", g.degree}};
        if (g.lift != GroupElement{}) e["lift"] = detail::element_text(G, g.lift);
        gens.push_back(std::move(e));
    }
    for (const auto& e : sc.boundary) bd.push_back({{"from", e.from}, {"to", e.to}, {"value", render_series(e.value)}});
    j["complex"] = {{"generators", gens}, {"boundary", bd}};
    if (sc.orbits) {
        json os = json::array();
        for (const auto& o : *sc.orbits) {
            json e = {{"class", detail::element_text(G, o.cls)}, {"period", o.period}, {"sign", o.sign}};
            if (o.count != 1) e["count"] = o.count;
            os.push_back(std::move(e));
        }
        j["orbits"] = os;
    }
    if (sc.orbit_completeness) j["orbit_completeness"] = detail::grade_json(*sc.orbit_completeness);
    if (sc.factors) {
        json fs = json::array();
        for (const auto& f : *sc.factors)
            fs.push_back({{"class", detail::element_text(G, f.cls)}, {"type", factor_type_name(f.type)}});
        j["factors"] = fs;
    }
    if (sc.fiber_maps) {
        json fm = json::array();
        for (const auto& m : *sc.fiber_maps) {
            json rows = json::array();
            for (const auto& r : m) {
                json row = json::array();
                for (const auto& x : r) row.push_back(to_int64(x));
                rows.push_back(row);
            }
            fm.push_back(rows);
        }
        j["fiber_maps"] = fm;
    }
    if (!sc.moves.empty()) {
        json ms = json::array();
        for (const auto& m : sc.moves) ms.push_back(detail::move_json(m, G));
        j["moves"] = ms;
    }
    if (sc.cover)
        j["cover"] = {{"k", sc.cover->k}, {"weights", sc.cover->weights}, {"torsion_weight", sc.cover->torsion_weight}};
    if (sc.summands) j["summands"] = *sc.summands;
    return j;
}

inline std::string render_scenario(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

/// The complex of a scenario at truncation r (exact scenarios keep polynomial entries).
inline BasedComplex build_complex(const Scenario& sc, const Truncation& r) {
    BasedComplex c(sc.group, sc.exact ? Truncation() : r, sc.effective_ambiguity());
    for (const auto& g : sc.generators) c.add_generator(g.name, g.degree, g.lift);
    for (const auto& e : sc.boundary) c.set_entry(e.from, e.to, sc.exact ? e.value : e.value.truncated(r));
    return c;
}

/// Orbit data from the first available source: explicit orbits, then product
/// factors, then fiber homology maps. Empty when none is given.
inline OrbitSet build_orbits(const Scenario& sc, const Truncation& r) {
    Truncation complete = sc.orbit_completeness ? Truncation(*sc.orbit_completeness) : r;
    OrbitSet s;
    s.completeness = complete;
    if (sc.orbits) {
        s.orbits = *sc.orbits;
        validate_orbits(*sc.group, s);
        return normalize_orbits(s);
    }
    if (sc.factors) return orbits_from_factors(sc.group, *sc.factors, complete);
    if (sc.fiber_maps) return orbits_from_fiber_maps(sc.group, *sc.fiber_maps, complete);
    return s;
}

inline FlowState build_state(const Scenario& sc, const Truncation& r) {
    return FlowState{build_complex(sc, r), build_orbits(sc, r)};
}

// ---- built-in scenarios --------------------------------------------------------

namespace builtin {

inline Scenario circle_morse() {
    Scenario sc;
    sc.name = "circle-morse";
    sc.group = GradedGroup::infinite_cyclic();
    sc.generators = {{"p", 1, {}}, {"q", 0, {}}};
    sc.boundary = {{"p", "q", parse_series("1 - t", sc.group)}};
    sc.orbits = std::vector<ClosedOrbit>{};
    return sc;
}

/// The constant flow around the circle: no critical points, one closed orbit of
/// period one and its iterates.
inline Scenario circle_flow() {
    Scenario sc;
    sc.name = "circle-flow";
    sc.group = GradedGroup::infinite_cyclic();
    sc.factors = std::vector<OrbitFactor>{{sc.group->generator(0), FactorType::kOneMinusInverse}};
    return sc;
}

/// circle-morse read over Z[t, t^-1].
inline Scenario circle_exact() {
    Scenario sc = circle_morse();
    sc.name = "circle-exact";
    sc.exact = true;
    sc.orbits.reset();
    return sc;
}

/// Mapping torus of a linear map of the torus: homology maps 1, A, det A.
inline Scenario mapping_torus(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    Scenario sc;
    sc.name = "mapping-torus";
    sc.group = GradedGroup::infinite_cyclic();
    IntMatrix h0{{Integer(1)}}, h1{{Integer(a), Integer(b)}, {Integer(c), Integer(d)}}, h2{{Integer(a * d - b * c)}};
    sc.fiber_maps = std::vector<IntMatrix>{h0, h1, h2};
    return sc;
}

inline Scenario cat_map() {
    Scenario sc = mapping_torus(2, 1, 1, 1);
    sc.name = "cat-map";
    return sc;
}

/// The exact complex of `from` over the Novikov ring of the same group, paired
/// with the empty orbit set.
inline Scenario latour(const Scenario& from) {
    if (!from.exact) throw ParseError("latour needs an exact scenario");
    Scenario sc = from;
    sc.name = from.name.empty() ? "latour" : "latour-" + from.name;
    sc.exact = false;
    sc.orbits = std::vector<ClosedOrbit>{};
    return sc;
}

struct RandomParams {
    int degrees = 3;          // generators live in degrees 0..degrees-1
    double density = 0.5;     // chance of each off-diagonal entry in the mixing matrices
    int max_per_degree = 3;
    int max_exponent = 2;
    std::int64_t torsion = 0;
};

namespace detail {

inline NovikovSeries random_poly(Rng& rng, const GroupPtr& g, int max_exp, int max_terms, bool positive_only) {
    NovikovSeries s(g);
    int n = static_cast<int>(rng.uniform(1, max_terms));
    for (int k = 0; k < n; ++k) {
        GroupElement h = g->scale(g->generator(0), rng.uniform(positive_only ? 1 : 0, max_exp));
        if (g->torsion_order() > 0) h.torsion = rng.uniform(0, g->torsion_order() - 1);
        std::int64_t c = rng.uniform(-2, 2);
        if (c == 0) c = 1;
        s += NovikovSeries::monomial(g, h, CyclotomicNumber(Rational(c)));
    }
    return s;
}

/// I + N with N strictly upper triangular; its inverse is the finite sum of (-N)^k.
inline std::pair<SeriesMatrix, SeriesMatrix> random_unipotent(Rng& rng, const GroupPtr& g, std::size_t n,
                                                             const RandomParams& p) {
    SeriesMatrix nil(n, n, g);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.chance(p.density)) nil(i, j) = random_poly(rng, g, p.max_exponent, 2, false);
    SeriesMatrix id = SeriesMatrix::identity(n, g);
    SeriesMatrix inv = id, power = id;
    for (std::size_t k = 1; k < n; ++k) {
        power = power * nil;
        inv = k % 2 == 1 ? inv - power : inv + power;
    }
    return {id + nil, inv};
}

}  // namespace detail

/// A random acyclic complex: pairs (a, b) with a unit boundary a -> u b, mixed by
/// random unipotent changes of basis in each degree. Entries stay polynomial.
inline Scenario random_complex(std::uint64_t seed, const RandomParams& p = {}) {
    if (p.degrees < 1) throw ParseError("random-complex needs at least one degree");
    if (p.density < 0 || p.density > 1) throw ParseError("density must lie in [0, 1]");
    if (p.max_per_degree < 1) throw ParseError("random-complex needs room for one generator per degree");
    Rng rng(seed);
    Scenario sc;
    sc.name = "random-complex";
    sc.seed = seed;
    sc.group = GradedGroup::make({Grade(1)}, p.torsion);
    const auto& g = sc.group;
    const auto D = static_cast<std::size_t>(p.degrees);
    // pairs[i]: number of pairs from degree i to i-1; degree i holds pairs[i] tops then pairs[i+1] bottoms
    std::vector<int> pairs(D + 1, 0);
    for (std::size_t i = 1; i < D; ++i) {
        int room = p.max_per_degree - pairs[i - 1];
        pairs[i] = room <= 0 ? 0 : static_cast<int>(rng.uniform(i == 1 ? 1 : 0, room));
    }
    auto size = [&](std::size_t i) { return static_cast<std::size_t>(pairs[i] + pairs[i + 1]); };
    BasedComplex c(g, Truncation());
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t k = 0; k < size(i); ++k)
            c.add_generator("c" + std::to_string(i) + "_" + std::to_string(k), static_cast<int>(i));
    std::vector<std::pair<SeriesMatrix, SeriesMatrix>> mix;
    for (std::size_t i = 0; i < D; ++i) mix.push_back(detail::random_unipotent(rng, g, size(i), p));
    for (std::size_t i = 1; i < D; ++i) {
        SeriesMatrix d(size(i - 1), size(i), g);
        for (int k = 0; k < pairs[i]; ++k) {
            // +-(1 or 2) * t^e * (1 + positive tail)
            std::int64_t lead = rng.uniform(0, 1) ? 1 : -1;
            if (rng.chance(0.25)) lead *= 2;
            GroupElement h = g->scale(g->generator(0), rng.uniform(-1, 1));
            NovikovSeries u = NovikovSeries::monomial(g, h, CyclotomicNumber(Rational(lead)));
            if (rng.chance(0.7))
                u += NovikovSeries::monomial(g, h) * detail::random_poly(rng, g, p.max_exponent, 2, true);
            d(static_cast<std::size_t>(pairs[i - 1] + k), static_cast<std::size_t>(k)) = u;
        }
        c.set_boundary(static_cast<int>(i), mix[i - 1].second * d * mix[i].first);
    }
    for (std::size_t i = 0; i < D; ++i)
        for (const auto& gen : c.generators(static_cast<int>(i))) sc.generators.push_back(gen);
    for (std::size_t i = 1; i < D; ++i)
        for (const auto& x : c.generators(static_cast<int>(i)))
            for (const auto& y : c.generators(static_cast<int>(i) - 1)) {
                const NovikovSeries& e = c.entry(x.name, y.name);
                if (!e.is_zero()) sc.boundary.push_back({x.name, y.name, e});
            }
    return sc;
}

}  // namespace builtin

}  // namespace novikov
