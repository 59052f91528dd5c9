#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "novikov/commands.hpp"

namespace {

using namespace novikov;

struct Cli {
    std::vector<std::string> files;
    std::string truncation;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string format = "text";
    unsigned jobs = 1;
};

CommandResult run_file(const std::string& command, const std::string& file, const CommandOptions& opts) {
    Scenario sc;
    try {
        sc = load_scenario(file);
    } catch (const ParseError& e) {
        return {2, std::string(opts.format == Format::kMachine ? "error=" : "error: ") + "parse: " + e.what() + "\n"};
    }
    if (command == "check") return cmd_check(sc, opts);
    if (command == "invariant") return cmd_invariant(sc, opts);
    if (command == "moves") return cmd_moves(sc, opts);
    return cmd_cover(sc, opts);
}

int run_batch(const std::string& command, const Cli& cli, const CommandOptions& opts) {
    std::vector<CommandResult> results(cli.files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cli.files.size();) results[i] = run_file(command, cli.files[i], opts);
    };
    unsigned n = std::max(1u, std::min<unsigned>(cli.jobs, static_cast<unsigned>(cli.files.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    int code = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results.size() > 1) {
            if (opts.format == Format::kMachine) std::cout << "file=" << cli.files[i] << '\n';
            else std::cout << "== " << cli.files[i] << " ==\n";
        }
        std::cout << results[i].output;
        code = std::max(code, results[i].exit_code);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Novikov torsion and closed-orbit zeta functions"};
    app.require_subcommand(1);
    Cli cli;
    GenerateParams gen;
    std::string gen_name, matrix, gen_from;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--truncation,-R", cli.truncation, "truncation grade R (default: scenario, NOVIKOV_DEFAULT_R, 16)");
        sub->add_option("--seed", cli.seed, "64-bit seed")->each([&](const std::string&) { cli.seed_set = true; });
        sub->add_option("--format", cli.format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
    };
    const std::pair<const char*, const char*> commands[] = {
        {"check", "validate a scenario: d^2 = 0 and consistent orbit data"},
        {"invariant", "torsion, zeta function and their product I per summand"},
        {"moves", "run the move script and verify invariance of I after each move"},
        {"cover", "compare a finite cyclic cover with the norm of the base data"},
    };
    for (const auto& [name, about] : commands) {
        auto* sub = app.add_subcommand(name, about);
        sub->add_option("files", cli.files, "scenario files or built-in names")->required();
        sub->add_option("--jobs,-j", cli.jobs, "parallel jobs over files")->check(CLI::PositiveNumber);
        common(sub);
    }
    auto* g = app.add_subcommand("generate", "print a built-in or random scenario");
    g->add_option("name", gen_name, "circle-flow | circle-morse | circle-exact | cat-map | mapping-torus | latour | random-complex")
        ->required();
    g->add_option("--matrix", matrix, "mapping-torus fiber matrix a,b,c,d");
    g->add_option("--from", gen_from, "exact scenario for latour");
    g->add_option("--degrees", gen.random.degrees, "random-complex: number of degrees");
    g->add_option("--density", gen.random.density, "random-complex: fill density of the mixing matrices");
    g->add_option("--max-per-degree", gen.random.max_per_degree, "random-complex: generators per degree");
    g->add_option("--torsion", gen.random.torsion, "random-complex: order of the torsion subgroup");
    common(g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CommandOptions opts;
    opts.format = cli.format == "machine" ? Format::kMachine : Format::kText;
    if (cli.seed_set) opts.seed = cli.seed;
    try {
        if (!cli.truncation.empty()) {
            opts.truncation = Grade::parse(cli.truncation);
            if (opts.truncation->sign() <= 0) throw ParseError("truncation must be positive");
        }
        if (*g) {
            if (!matrix.empty()) {
                std::vector<std::int64_t> m;
                std::stringstream ss(matrix);
                for (std::string item; std::getline(ss, item, ',');) m.push_back(std::stoll(item));
                gen.matrix = m;
            }
            if (!gen_from.empty()) gen.from = gen_from;
            gen.truncation = opts.truncation;
            std::cout << render_scenario(generate(gen_name, gen, cli.seed));
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {  // stoll
        std::cerr << "error: bad --matrix entry: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return run_batch(app.get_subcommands().front()->get_name(), cli, opts);
}
