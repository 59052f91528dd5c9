#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "novikov/scenario.hpp"

namespace novikov {

enum class Format { kText, kMachine };

struct CommandOptions {
    std::optional<Grade> truncation;
    std::optional<std::uint64_t> seed;
    Format format = Format::kText;
};

struct CommandResult {
    int exit_code = 0;  // 0 pass, 1 mathematical failure, 2 parse or validation error
    std::string output;
};

/// Line-oriented report: "key: value" for people, "key=value" for machines.
class Report {
public:
    explicit Report(Format f) : format_(f) {}

    void add(const std::string& key, const std::string& value) {
        if (format_ == Format::kMachine) out_ << key << '=' << value << '\n';
        else out_ << key << ": " << value << '\n';
    }
    void fail(const std::string& key, const std::string& value) {
        ok_ = false;
        add(key, value);
    }
    bool ok() const { return ok_; }
    void mark_failed() { ok_ = false; }
    std::string str() const { return out_.str(); }

private:
    Format format_;
    std::ostringstream out_;
    bool ok_ = true;
};

namespace detail {

inline void header(Report& rep, const Scenario& sc, const Grade& r, const CommandOptions& opts) {
    rep.add("scenario", sc.name.empty() ? "(unnamed)" : sc.name);
    rep.add("seed", std::to_string(opts.seed.value_or(sc.seed)));
    rep.add("truncation", r.str());
    rep.add("ambiguity", std::string(ambiguity_name(sc.effective_ambiguity())) +
                             (sc.effective_ambiguity() == Ambiguity::kTranslation
                                  ? " (representative: leading monomial 1, positive leading coefficient)"
                                  : " (representative: positive leading coefficient)"));
}

inline bool wanted(const Scenario& sc, std::int64_t d) {
    if (!sc.summands) return true;
    for (auto x : *sc.summands)
        if (x == d) return true;
    return false;
}

inline std::string summand_key(std::int64_t d) { return "summand." + std::to_string(d); }

/// Series over K shown through the inclusion into H.
inline NovikovSeries to_ambient(const NovikovSeries& s, const SubgroupEmbedding& emb) {
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    for (const auto& t : s.terms()) terms.emplace_back(emb.embed(t.element), t.coeff);
    return NovikovSeries::from_terms(emb.ambient, s.coeff_order(), std::move(terms), s.truncation());
}

template <class F>
CommandResult guarded(const CommandOptions& opts, F&& body) {
    Report rep(opts.format);
    try {
        body(rep);
        return {rep.ok() ? 0 : 1, rep.str()};
    } catch (const ParseError& e) {
        rep.add("error", std::string("parse: ") + e.what());
        return {2, rep.str()};
    } catch (const Error& e) {
        rep.add("error", e.what());
        rep.add("verdict", "fail");
        return {1, rep.str()};
    }
}

}  // namespace detail

// ---- check ---------------------------------------------------------------------

inline CommandResult cmd_check(const Scenario& sc, const CommandOptions& opts = {}) {
    return detail::guarded(opts, [&](Report& rep) {
        Grade r = resolve_truncation(opts.truncation, sc);
        detail::header(rep, sc, r, opts);
        BasedComplex c = build_complex(sc, Truncation(r));
        rep.add("generators", std::to_string(c.total_size()));
        BoundaryReport br = check_boundary(c);
        for (std::size_t i = 0; i < br.offenders.size(); ++i) {
            const auto& o = br.offenders[i];
            rep.fail("boundary.offender." + std::to_string(i),
                     "d(d(" + o.col + ")) has coefficient " + render_series(o.value) + " on " + o.row +
                         " (degree " + std::to_string(o.degree) + " to " + std::to_string(o.degree - 2) + ")");
        }
        rep.add("boundary", br.ok() ? "d^2 = 0" : "d^2 != 0");

        OrbitSet s;
        try {
            s = build_orbits(sc, Truncation(r));
            rep.add("orbits", std::to_string(s.orbits.size()) + " (complete below " + s.completeness.str() + ")");
            NovikovSeries z = zeta_from_orbits(sc.group, s);
            rep.add("zeta", render_series(z));
            if (sc.orbits && sc.factors) {
                // both descriptions given: they must agree term by term
                NovikovSeries zp = zeta_product(sc.group, *sc.factors, s.completeness);
                NovikovSeries diff = (z - zp).truncated(min(z.truncation(), zp.truncation()));
                if (!diff.is_zero()) {
                    const auto& t = diff.leading();
                    std::string where = render_series(NovikovSeries::monomial(sc.group, t.element));
                    rep.fail("zeta.mismatch", "orbits give " + z.coefficient(t.element).str() + ", factors give " +
                                                  zp.coefficient(t.element).str() + " at " + where);
                    for (std::size_t i = 0; i < sc.factors->size(); ++i) {
                        const auto& f = (*sc.factors)[i];
                        for (std::int64_t k = 1; sc.group->grade(sc.group->scale(f.cls, k)) <= t.grade; ++k)
                            if (sc.group->scale(f.cls, k) == t.element)
                                rep.add("zeta.suspect", "factors[" + std::to_string(i) + "] " +
                                                            factor_type_name(f.type) + " of class " +
                                                            detail::element_text(*sc.group, f.cls));
                    }
                } else {
                    rep.add("zeta.factors", "consistent with orbits");
                }
            }
        } catch (const MathError& e) {
            rep.fail("orbits.error", e.what());
            // a single flipped sign is the usual culprit
            if (sc.orbits && s.orbits.size() == sc.orbits->size()) {
                for (std::size_t i = 0; i < sc.orbits->size(); ++i) {
                    OrbitSet t = s;
                    t.orbits = *sc.orbits;
                    t.orbits[i].sign = -t.orbits[i].sign;
                    try {
                        zeta_from_orbits(sc.group, t);
                    } catch (const MathError&) {
                        continue;
                    }
                    const auto& o = (*sc.orbits)[i];
                    rep.add("orbits.suspect", "orbits[" + std::to_string(i) + "] class " +
                                                  detail::element_text(*sc.group, o.cls) + " period " +
                                                  std::to_string(o.period) + ": flipping its sign restores integrality");
                }
            }
        }
        rep.add("verdict", rep.ok() ? "pass" : "fail");
    });
}

// ---- invariant -----------------------------------------------------------------

inline CommandResult cmd_invariant(const Scenario& sc, const CommandOptions& opts = {}) {
    return detail::guarded(opts, [&](Report& rep) {
        Grade r = resolve_truncation(opts.truncation, sc);
        detail::header(rep, sc, r, opts);
        Truncation R(r);
        FlowState st = build_state(sc, R);
        BoundaryReport br = check_boundary(st.complex);
        if (!br.ok()) throw MathError("d^2 != 0; run check for the offending entries");
        TorsionOptions topts;
        topts.pivot_seed = opts.seed;
        if (sc.exact) topts.cap = R;
        if (opts.seed) rep.add("pivot_order", "seeded");
        Ambiguity a = sc.effective_ambiguity();

        TorsionValue tau = torsion(st.complex, topts);
        NovikovSeries zeta = zeta_from_orbits(sc.group, st.orbits);
        InvariantI inv = multiply_summands(tau, [&](std::int64_t d) { return project_to_summand(zeta, d); });
        for (std::size_t i = 0; i < tau.summands.size(); ++i) {
            std::int64_t d = tau.summands[i].order;
            if (!detail::wanted(sc, d)) continue;
            std::string key = detail::summand_key(d);
            rep.add(key + ".T_m", render_summand(tau.summands[i], a));
            rep.add(key + ".zeta", render_series(project_to_summand(zeta, d)));
            rep.add(key + ".I", render_summand(inv.summands[i], a));
        }
        if (sc.exact) {
            // the group-ring torsion pushed into the Novikov ring against the torsion of the embedded complex
            SplitValue gr = embedded_group_ring_torsion(st.complex, sc.group, R);
            SplitValue lam = torsion(latour_embed(st.complex, sc.group, R));
            for (const auto& s : gr.summands)
                if (detail::wanted(sc, s.order))
                    rep.add(detail::summand_key(s.order) + ".iota_T", render_summand(s, a));
            Comparison cmp = compare(gr, lam, a, R);
            for (const auto& dgn : cmp.diagnostics) rep.fail("embedding.mismatch", dgn);
            rep.add("embedding", cmp.equal ? "iota(T) = T_m of the embedded complex" : "mismatch");
        }
        rep.add("verdict", rep.ok() ? "pass" : "fail");
    });
}

// ---- moves ---------------------------------------------------------------------

inline CommandResult cmd_moves(const Scenario& sc, const CommandOptions& opts = {}) {
    return detail::guarded(opts, [&](Report& rep) {
        Grade r = resolve_truncation(opts.truncation, sc);
        detail::header(rep, sc, r, opts);
        if (sc.exact) throw ParseError("moves need a Novikov-ring scenario, not an exact one");
        FlowState st = build_state(sc, Truncation(r));
        if (!check_boundary(st.complex).ok()) throw MathError("d^2 != 0; run check for the offending entries");
        ScriptResult res = run_script(st, sc.moves);
        Ambiguity a = sc.effective_ambiguity();
        for (std::size_t k = 0; k < res.reports.size(); ++k) {
            const auto& m = res.reports[k];
            std::string key = "move." + std::to_string(k);
            rep.add(key, m.move);
            for (const auto& s : m.after.summands)
                if (detail::wanted(sc, s.order)) rep.add(key + "." + detail::summand_key(s.order) + ".I", render_summand(s, a));
            for (const auto& c : m.checks) {
                std::string v = c.ok ? "ok" : "FAIL";
                if (!c.detail.empty()) v += " (" + c.detail + ")";
                if (c.ok) rep.add(key + ".check." + c.name, v);
                else rep.fail(key + ".check." + c.name, v);
            }
            for (const auto& dgn : m.diagnostics) rep.add(key + ".diagnostic", dgn);
            if (m.invariant) rep.add(key + ".verdict", "invariant");
            else rep.fail(key + ".verdict", "violated");
        }
        if (!res.failure.empty()) rep.fail("script.error", res.failure);
        for (const auto& dgn : res.overall.diagnostics) rep.add("overall.diagnostic", dgn);
        if (res.overall.invariant) rep.add("overall", "invariant");
        else rep.fail("overall", "violated");
        rep.add("verdict", rep.ok() ? "pass" : "fail");
    });
}

// ---- cover ---------------------------------------------------------------------

inline CommandResult cmd_cover(const Scenario& sc, const CommandOptions& opts = {}) {
    return detail::guarded(opts, [&](Report& rep) {
        Grade r = resolve_truncation(opts.truncation, sc);
        detail::header(rep, sc, r, opts);
        if (sc.exact) throw ParseError("cover needs a Novikov-ring scenario, not an exact one");
        const auto& G = sc.group;
        CoverSpec spec = sc.cover.value_or(CoverSpec{});
        if (!sc.cover && G->rank() > 0) spec.weights = {1};
        CyclicQuotient m = spec.quotient(*G);
        SubgroupEmbedding emb;
        try {
            emb = kernel_of_quotient(G, m);
        } catch (const MathError& e) {
            throw ParseError(std::string("cover: ") + e.what());
        }
        rep.add("cover.k", std::to_string(m.modulus));
        Truncation R(r);
        FlowState st = build_state(sc, R);
        Ambiguity a = sc.effective_ambiguity();
        auto check = [&](const std::string& key, bool ok, const std::string& detail) {
            if (ok) rep.add(key, "ok");
            else rep.fail(key, "FAIL (" + detail + ")");
        };

        NovikovSeries zeta = zeta_from_orbits(G, st.orbits);
        NovikovSeries norm_zeta = cover_norm(zeta, emb);
        OrbitSet lifted = cover_orbits(G, st.orbits, emb);
        NovikovSeries zeta_cover = zeta_from_orbits(emb.kernel, lifted);
        rep.add("zeta", render_series(zeta));
        rep.add("Norm(zeta)", render_series(detail::to_ambient(norm_zeta, emb)));
        rep.add("zeta(cover)", render_series(detail::to_ambient(zeta_cover, emb)));
        check("identity.zeta(cover)=Norm(zeta)", agree(norm_zeta, zeta_cover),
              render_series(norm_zeta) + " vs " + render_series(zeta_cover));

        NovikovSeries x = zeta - NovikovSeries::one(G);
        NovikovSeries tr = cover_trace(x, emb);
        NovikovSeries kx = restrict_to_kernel(x, emb).scaled(CyclotomicNumber(Rational(m.modulus)));
        check("identity.Tr=k*iota^*", agree(tr, kx), render_series(tr) + " vs " + render_series(kx));
        if (x.in_lambda_plus() && !x.is_zero()) {
            NovikovSeries lhs = log_one_plus(norm_zeta - NovikovSeries::one(emb.kernel));
            NovikovSeries rhs = cover_trace(log_one_plus(x), emb);
            check("identity.logNorm=Trlog", agree(lhs, rhs), render_series(lhs) + " vs " + render_series(rhs));
        }

        if (!check_boundary(st.complex).ok()) throw MathError("d^2 != 0; run check for the offending entries");
        TorsionValue tau = torsion(st.complex);
        TorsionValue norm_tau = norm_split(tau, emb);
        BasedComplex cc = cover_complex(st.complex, emb);
        TorsionValue tau_cover = torsion(cc);
        Comparison ct = compare(norm_tau, tau_cover, a, R);
        for (const auto& dgn : ct.diagnostics) rep.add("torsion.diagnostic", dgn);
        check("identity.T(cover)=Norm(T)", ct.equal, "see diagnostics");

        InvariantI inv_cover =
            multiply_summands(tau_cover, [&](std::int64_t d) { return project_to_summand(zeta_cover, d); });
        InvariantI norm_inv =
            multiply_summands(norm_tau, [&](std::int64_t d) { return project_to_summand(norm_zeta, d); });
        for (std::size_t i = 0; i < inv_cover.summands.size(); ++i) {
            std::int64_t d = inv_cover.summands[i].order;
            if (!detail::wanted(sc, d)) continue;
            const auto& s = inv_cover.summands[i];
            std::string text = "0";
            if (s.value)
                text = render_series(detail::to_ambient(canonicalize(*s.value, a).series(), emb));
            rep.add(detail::summand_key(d) + ".I(cover)", text);
        }
        Comparison ci = compare(norm_inv, inv_cover, a, R);
        for (const auto& dgn : ci.diagnostics) rep.add("invariant.diagnostic", dgn);
        check("identity.I(cover)=Norm(I)", ci.equal, "see diagnostics");
        rep.add("verdict", rep.ok() ? "pass" : "fail");
    });
}

// ---- loading and generation ------------------------------------------------------

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"circle-flow", "circle-morse", "circle-exact", "cat-map"};
    return names;
}

inline std::optional<Scenario> builtin_scenario(const std::string& name) {
    if (name == "circle-flow") return builtin::circle_flow();
    if (name == "circle-morse") return builtin::circle_morse();
    if (name == "circle-exact") return builtin::circle_exact();
    if (name == "cat-map") return builtin::cat_map();
    return std::nullopt;
}

/// A scenario file, or a built-in scenario when no file of that name exists.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        if (auto sc = builtin_scenario(path); sc && !std::filesystem::exists(path)) return *sc;
        throw ParseError("cannot open scenario file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

struct GenerateParams {
    std::optional<std::vector<std::int64_t>> matrix;  // mapping-torus a,b,c,d
    std::optional<std::string> from;                  // latour source scenario
    builtin::RandomParams random;
    std::optional<Grade> truncation;
};

inline Scenario generate(const std::string& name, const GenerateParams& p, std::uint64_t seed) {
    Scenario sc;
    if (name == "mapping-torus") {
        auto m = p.matrix.value_or(std::vector<std::int64_t>{2, 1, 1, 1});
        if (m.size() != 4) throw ParseError("--matrix needs four entries a,b,c,d");
        sc = builtin::mapping_torus(m[0], m[1], m[2], m[3]);
    } else if (name == "latour") {
        if (!p.from) throw ParseError("latour needs --from FILE");
        sc = builtin::latour(load_scenario(*p.from));
    } else if (name == "random-complex") {
        sc = builtin::random_complex(seed, p.random);
    } else if (auto b = builtin_scenario(name)) {
        sc = *b;
    } else {
        throw ParseError("unknown generator '" + name + "'");
    }
    if (name != "random-complex") sc.seed = seed;
    if (p.truncation) {
        if (p.truncation->sign() <= 0) throw ParseError("truncation must be positive");
        sc.truncation = p.truncation;
    }
    return sc;
}

}  // namespace novikov
