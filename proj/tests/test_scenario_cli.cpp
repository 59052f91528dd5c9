#include <cstdlib>

#include <gtest/gtest.h>

#include "novikov/commands.hpp"
#include "support.hpp"

using namespace novikov;
using namespace testsupport;

namespace {

std::string fixture(const std::string& name) { return std::string(NOVIKOV_FIXTURES) + "/" + name; }
std::string scenario_file(const std::string& name) { return std::string(NOVIKOV_SCENARIOS) + "/" + name; }

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

// A scenario exercising every optional field, with random contents.
Scenario random_scenario(std::uint64_t seed) {
    Rng rng(seed);
    builtin::RandomParams p;
    p.degrees = static_cast<int>(rng.uniform(1, 4));
    p.max_per_degree = static_cast<int>(rng.uniform(1, 3));
    p.torsion = rng.chance(0.3) ? rng.uniform(2, 4) : 0;
    Scenario sc = builtin::random_complex(seed, p);
    const auto& g = sc.group;
    if (rng.chance(0.5)) sc.truncation = Grade(rng.uniform(4, 20));
    if (rng.chance(0.3)) sc.ambiguity = rng.chance(0.5) ? Ambiguity::kSign : Ambiguity::kTranslation;
    if (rng.chance(0.5)) {
        std::vector<ClosedOrbit> os;
        for (int k = 0; k < rng.uniform(0, 4); ++k) {
            std::int64_t period = rng.uniform(1, 3);
            GroupElement cls = g->scale(g->generator(0), period * rng.uniform(1, 2));
            os.push_back({cls, period, rng.chance(0.5) ? 1 : -1, rng.uniform(1, 3)});
        }
        sc.orbits = os;
        if (rng.chance(0.5)) sc.orbit_completeness = Grade(rng.uniform(3, 9));
    }
    if (rng.chance(0.4)) {
        std::vector<OrbitFactor> fs;
        for (int k = 0; k < rng.uniform(1, 3); ++k)
            fs.push_back({g->scale(g->generator(0), rng.uniform(1, 3)),
                          static_cast<FactorType>(rng.uniform(0, 3))});
        sc.factors = fs;
    }
    if (rng.chance(0.5)) {
        auto gens = sc.generators;
        sc.moves.push_back(moves::NoOp{});
        if (gens.size() >= 1) {
            sc.moves.push_back(moves::SelfSlide{gens[0].name, NovikovSeries::one(g) + random_plus(rng, g, 2, 2),
                                                g->generator(0)});
            moves::Birth b;
            b.p = "bp";
            b.q = "bq";
            b.degree = gens[0].degree + 1;
            b.mu = static_cast<int>(rng.uniform(0, 1));
            b.eta = random_plus(rng, g, 2, 2);
            b.w.emplace_back(gens[0].name, random_poly(rng, g, 2, 0, 2));
            sc.moves.push_back(b);
            sc.moves.push_back(moves::Death{"bp", "bq", b.mu});
        }
        if (gens.size() >= 2 && gens[0].degree == gens[1].degree)
            sc.moves.push_back(moves::Slide{gens[0].name, gens[1].name, -1, g->generator(0)});
        sc.moves.push_back(moves::TamperZeta{{g->generator(0), FactorType::kOnePlus}});
    }
    if (rng.chance(0.4)) sc.cover = CoverSpec{rng.uniform(2, 4), {1}, 0};
    if (rng.chance(0.3)) sc.summands = std::vector<std::int64_t>{1};
    return sc;
}

CommandResult run(const std::string& command, const std::string& path, CommandOptions opts = {}) {
    Scenario sc;
    try {
        sc = load_scenario(path);
    } catch (const ParseError& e) {
        return {2, e.what()};
    }
    if (command == "check") return cmd_check(sc, opts);
    if (command == "invariant") return cmd_invariant(sc, opts);
    if (command == "moves") return cmd_moves(sc, opts);
    return cmd_cover(sc, opts);
}

}  // namespace

// ---- scenario files ----------------------------------------------------------------

TEST(ScenarioIo, BuiltinsRoundTrip) {
    for (const auto& name : builtin_names()) {
        Scenario sc = *builtin_scenario(name);
        std::string text = render_scenario(sc);
        Scenario back = parse_scenario(text);
        EXPECT_TRUE(back == sc) << name;
        EXPECT_EQ(render_scenario(back), text) << name;
    }
    Scenario mt = builtin::mapping_torus(3, 2, 1, 1);
    EXPECT_TRUE(parse_scenario(render_scenario(mt)) == mt);
    Scenario lt = builtin::latour(builtin::circle_exact());
    EXPECT_TRUE(parse_scenario(render_scenario(lt)) == lt);
}

TEST(ScenarioIo, RandomScenariosRoundTrip) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Scenario sc = random_scenario(seed);
        std::string text = render_scenario(sc);
        Scenario back = parse_scenario(text);
        EXPECT_TRUE(back == sc) << "seed " << seed << "\n" << text;
        EXPECT_EQ(render_scenario(back), text) << "seed " << seed;
    }
}

TEST(ScenarioIo, ShippedScenariosParse) {
    for (const char* f : {"cat_map.json", "cat_map_cover3.json", "circle_exact.json", "circle_flow.json",
                          "circle_morse.json", "irrational_plane.json", "moves_demo.json", "random_complex_7.json",
                          "torsion_circle.json"}) {
        Scenario sc;
        ASSERT_NO_THROW(sc = load_scenario(scenario_file(f))) << f;
        EXPECT_TRUE(parse_scenario(render_scenario(sc)) == sc) << f;
    }
}

TEST(ScenarioIo, ParseErrors) {
    EXPECT_THROW(parse_scenario("[1, 2]"), ParseError);
    EXPECT_THROW(parse_scenario("{\"group\": {\"free_rank\": 3}}"), ParseError);
    EXPECT_THROW(parse_scenario("{"), ParseError);
    EXPECT_THROW(parse_scenario(R"({"complex": {"generators": [{"name": "p", "degree": 1}, {"name": "p", "degree": 0}]}})"),
                 ParseError);
    EXPECT_THROW(parse_scenario(R"({"orbits": [{"class": "t", "period": 0, "sign": 1}]})"), ParseError);
    EXPECT_THROW(parse_scenario(R"({"factors": [{"class": "t", "type": "(1+h)^2"}]})"), ParseError);
    EXPECT_THROW(load_scenario(fixture("does_not_exist.json")), ParseError);
    EXPECT_THROW(load_scenario(fixture("malformed_series.json")), ParseError);
    EXPECT_THROW(load_scenario(fixture("unknown_generator.json")), ParseError);
}

TEST(ScenarioIo, BuiltinNamesLoad) {
    EXPECT_TRUE(load_scenario("circle-morse") == builtin::circle_morse());
    EXPECT_TRUE(load_scenario("cat-map") == builtin::cat_map());
}

TEST(ScenarioIo, TruncationPrecedence) {
    Scenario sc = builtin::circle_morse();
    ::unsetenv("NOVIKOV_DEFAULT_R");
    EXPECT_EQ(resolve_truncation(std::nullopt, sc), Grade(16));
    ::setenv("NOVIKOV_DEFAULT_R", "7", 1);
    EXPECT_EQ(resolve_truncation(std::nullopt, sc), Grade(7));
    sc.truncation = Grade(9);
    EXPECT_EQ(resolve_truncation(std::nullopt, sc), Grade(9));
    EXPECT_EQ(resolve_truncation(Grade(4), sc), Grade(4));
    ::unsetenv("NOVIKOV_DEFAULT_R");
    EXPECT_THROW(resolve_truncation(Grade(-3), sc), ParseError);
    EXPECT_THROW(resolve_truncation(Grade(0), sc), ParseError);
}

// ---- commands ------------------------------------------------------------------------

TEST(Commands, FixturesExitCodes) {
    EXPECT_EQ(run("check", fixture("corrupted_boundary.json")).exit_code, 1);
    EXPECT_EQ(run("check", fixture("malformed_series.json")).exit_code, 2);
    EXPECT_EQ(run("check", fixture("unknown_generator.json")).exit_code, 2);
    EXPECT_EQ(run("check", fixture("mis_signed_orbit.json")).exit_code, 1);
    EXPECT_EQ(run("check", fixture("mis_signed_factor.json")).exit_code, 1);
    EXPECT_EQ(run("moves", fixture("wrong_zeta_bookkeeping.json")).exit_code, 1);
}

TEST(Commands, FixtureDiagnosticsLocateTheFault) {
    std::string corrupted = run("check", fixture("corrupted_boundary.json")).output;
    EXPECT_TRUE(contains(corrupted, "d(d(e))")) << corrupted;
    EXPECT_TRUE(contains(corrupted, "on v")) << corrupted;

    std::string orbit = run("check", fixture("mis_signed_orbit.json")).output;
    EXPECT_TRUE(contains(orbit, "orbits[1]")) << orbit;

    std::string factor = run("check", fixture("mis_signed_factor.json")).output;
    EXPECT_TRUE(contains(factor, "factors[0]")) << factor;

    std::string zeta = run("moves", fixture("wrong_zeta_bookkeeping.json")).output;
    EXPECT_TRUE(contains(zeta, "move.1")) << zeta;
    EXPECT_TRUE(contains(zeta, "violated")) << zeta;
    EXPECT_TRUE(contains(zeta, "summand d=1")) << zeta;

    std::string malformed = run("check", fixture("malformed_series.json")).output;
    EXPECT_TRUE(contains(malformed, "p")) << malformed;
    std::string unknown = run("check", fixture("unknown_generator.json")).output;
    EXPECT_TRUE(contains(unknown, "'r'")) << unknown;
}

TEST(Commands, ShippedScenariosPass) {
    CommandOptions o;
    o.truncation = Grade(8);
    for (const char* f : {"cat_map.json", "circle_flow.json", "circle_morse.json", "irrational_plane.json",
                          "random_complex_7.json", "torsion_circle.json", "circle_exact.json"}) {
        auto r = run("invariant", scenario_file(f), o);
        EXPECT_EQ(r.exit_code, 0) << f << "\n" << r.output;
        EXPECT_EQ(run("check", scenario_file(f), o).exit_code, 0) << f;
    }
    auto m = run("moves", scenario_file("moves_demo.json"), o);
    EXPECT_EQ(m.exit_code, 0) << m.output;
    for (const char* f : {"cat_map_cover3.json", "circle_flow.json", "torsion_circle.json"}) {
        auto c = run("cover", scenario_file(f), o);
        EXPECT_EQ(c.exit_code, 0) << f << "\n" << c.output;
    }
}

TEST(Commands, InvariantOfCircleFlowIsItsZeta) {
    CommandOptions o;
    o.truncation = Grade(10);
    o.format = Format::kMachine;
    auto r = cmd_invariant(builtin::circle_flow(), o);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(contains(r.output, "summand.1.T_m=1\n")) << r.output;
    EXPECT_TRUE(contains(r.output, "summand.1.I=1 + t + t^2 + t^3 + t^4 + t^5 + t^6 + t^7 + t^8 + t^9 + O(10)\n"))
        << r.output;
    EXPECT_TRUE(contains(r.output, "truncation=10\n")) << r.output;
}

TEST(Commands, Deterministic) {
    CommandOptions o;
    o.truncation = Grade(8);
    for (const auto& name : builtin_names()) {
        Scenario sc = *builtin_scenario(name);
        EXPECT_EQ(cmd_invariant(sc, o).output, cmd_invariant(sc, o).output) << name;
        EXPECT_EQ(cmd_check(sc, o).output, cmd_check(sc, o).output) << name;
    }
    CommandOptions seeded = o;
    seeded.seed = 99;
    Scenario rc = builtin::random_complex(3);
    EXPECT_EQ(cmd_invariant(rc, seeded).output, cmd_invariant(rc, seeded).output);
    EXPECT_EQ(cmd_invariant(rc, seeded).exit_code, 0);
}

TEST(Commands, ExactScenarioRejectedByMovesAndCover) {
    EXPECT_EQ(cmd_moves(builtin::circle_exact()).exit_code, 2);
    EXPECT_EQ(cmd_cover(builtin::circle_exact()).exit_code, 2);
}

// ---- generate ------------------------------------------------------------------------

TEST(Generate, MappingTorus) {
    GenerateParams p;
    p.matrix = std::vector<std::int64_t>{2, 1, 1, 1};
    Scenario sc = generate("mapping-torus", p, 0);
    ASSERT_TRUE(sc.fiber_maps.has_value());
    std::vector<IntMatrix> want{{{Integer(1)}}, {{Integer(2), Integer(1)}, {Integer(1), Integer(1)}}, {{Integer(1)}}};
    EXPECT_EQ(*sc.fiber_maps, want);
    EXPECT_TRUE(sc.generators.empty());
    EXPECT_TRUE(sc.boundary.empty());
    p.matrix = std::vector<std::int64_t>{1, 2, 3};
    EXPECT_THROW(generate("mapping-torus", p, 0), ParseError);
}

TEST(Generate, RandomComplexIsReproducible) {
    GenerateParams p;
    std::string a = render_scenario(generate("random-complex", p, 7));
    std::string b = render_scenario(generate("random-complex", p, 7));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, render_scenario(generate("random-complex", p, 8)));
    Scenario sc = parse_scenario(a);
    EXPECT_EQ(sc.seed, 7u);
    EXPECT_TRUE(check_boundary(build_complex(sc, Truncation(8))).ok());
    EXPECT_FALSE(torsion(build_complex(sc, Truncation(8))).summands[0].is_zero());
}

TEST(Generate, LatourAndErrors) {
    GenerateParams p;
    p.from = scenario_file("circle_exact.json");
    Scenario sc = generate("latour", p, 0);
    EXPECT_FALSE(sc.exact);
    ASSERT_TRUE(sc.orbits.has_value());
    EXPECT_TRUE(sc.orbits->empty());
    EXPECT_EQ(cmd_invariant(sc).exit_code, 0);
    p.from = scenario_file("circle_morse.json");
    EXPECT_THROW(generate("latour", p, 0), ParseError);
    EXPECT_THROW(generate("no-such-thing", {}, 0), ParseError);
    GenerateParams t;
    t.truncation = Grade(-1);
    EXPECT_THROW(generate("circle-flow", t, 0), ParseError);
}
