#include <ccc/ccc.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{
    ccc::json read_json_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::runtime_error("cannot open " + path);
        }
        return ccc::json::parse(in);
    }

    void write_text(const std::string &path, const std::string &text)
    {
        if (path.empty() || path == "-")
        {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out)
        {
            throw std::runtime_error("cannot write " + path);
        }
        out << text;
    }

    std::pair<std::int64_t, std::int64_t> parse_int_range(const std::string &text)
    {
        const auto dots = text.find("..");
        if (dots == std::string::npos)
        {
            const auto v = std::stoll(text);
            return {v, v};
        }
        return {std::stoll(text.substr(0, dots)), std::stoll(text.substr(dots + 2))};
    }

    /// Optional parameter overrides shared by several subcommands.
    struct ParamFlags
    {
        std::string alpha, delta, gamma, beta, d;
        std::int64_t n_min = -1;

        void add(CLI::App *app)
        {
            app->add_option("--alpha", alpha, "churn rate");
            app->add_option("--delta", delta, "failure fraction");
            app->add_option("--gamma", gamma, "join threshold fraction");
            app->add_option("--beta", beta, "phase threshold fraction");
            app->add_option("--nmin", n_min, "minimum system size");
            app->add_option("--d", d, "maximum message delay in time units");
        }

        void apply(ccc::ModelParams &p) const
        {
            if (!alpha.empty())
            {
                p.alpha = ccc::parse_decimal(alpha);
            }
            if (!delta.empty())
            {
                p.delta = ccc::parse_decimal(delta);
            }
            if (!gamma.empty())
            {
                p.gamma = ccc::parse_decimal(gamma);
            }
            if (!beta.empty())
            {
                p.beta = ccc::parse_decimal(beta);
            }
            if (n_min >= 0)
            {
                p.n_min = n_min;
            }
            if (!d.empty())
            {
                const ccc::Rational ticks = ccc::parse_decimal(d) * ccc::kTicksPerUnit;
                p.d = static_cast<ccc::Time>(boost::multiprecision::numerator(ticks).convert_to<std::int64_t>() /
                                             boost::multiprecision::denominator(ticks).convert_to<std::int64_t>());
            }
        }
    };
}

int main(int argc, char **argv)
{
    CLI::App app{"Continuous-churn store-collect simulator and trace checker"};
    app.require_subcommand(1);

    // simulate
    auto *sim = app.add_subcommand("simulate", "run a scenario and write its trace");
    std::string scenario_path, trace_out;
    std::optional<std::uint64_t> seed_override;
    ParamFlags sim_params;
    sim->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--seed", seed_override, "override the scenario seed");
    sim->add_option("--out", trace_out, "trace JSON-lines output (default stdout)");
    sim_params.add(sim);

    // check
    auto *chk = app.add_subcommand("check", "check a trace");
    std::string trace_path, props = "auto";
    std::size_t budget = 12;
    chk->add_option("--trace", trace_path, "trace JSON-lines file")->required();
    chk->add_option("--props", props, "comma list of regularity,snapshot,lattice,liveness,knowledge,objects or 'auto'");
    chk->add_option("--budget", budget, "exhaustive linearizability budget (operations)");

    // params
    auto *par = app.add_subcommand("params", "evaluate the parameter constraints");
    ParamFlags par_flags;
    par_flags.add(par);

    // fuzz
    auto *fz = app.add_subcommand("fuzz", "generate, run and check random scenarios");
    std::int64_t runs = 100, ops = 100;
    std::string nodes = "5..20", object = "store_collect", lattice = "set", mutation = "none", horizon = "60", fuzz_props, delay = "mixed";
    std::uint64_t fuzz_seed = 1;
    std::int64_t churn_events = 0, crashes = 0;
    std::string think = "0.5", mix, adversary;
    bool no_shrink = false;
    ParamFlags fz_params;
    fz->add_option("--runs", runs, "number of scenarios");
    fz->add_option("--nodes", nodes, "initial node count range LO..HI");
    fz->add_option("--ops", ops, "maximum operations per scenario");
    fz->add_option("--horizon", horizon, "horizon in time units");
    fz->add_option("--seed", fuzz_seed, "fuzz seed");
    fz->add_option("--object", object, "store_collect, max_register, abort_flag, set, snapshot, lattice");
    fz->add_option("--lattice", lattice, "set or max");
    fz->add_option("--mutation", mutation, "none, drop_store_echo, skip_store_back");
    fz->add_option("--churn", churn_events, "target enter/leave events per scenario");
    fz->add_option("--crashes", crashes, "target crashes per scenario");
    fz->add_option("--delay", delay, "uniform, fixed, adversarial, skewed or mixed (the first three)");
    fz->add_option("--think", think, "maximum think time between operations, in time units");
    fz->add_option("--mix", mix, "comma list of operations to draw from (default: all of the object's)");
    fz->add_option("--adversary", adversary, "crash adversary: random or none-delivered (default: mixed)");
    fz->add_option("--props", fuzz_props, "properties to check (default: applicable)");
    fz->add_flag("--no-shrink", no_shrink, "do not shrink failing scenarios");
    fz_params.add(fz);

    // scan
    auto *sc = app.add_subcommand("scan", "feasible-region scan as CSV");
    std::string scan_alpha = "0..0.05:0.005", scan_delta = "0..0.25:0.01", scan_out;
    std::int64_t scan_nmin = 2;
    sc->add_option("--alpha", scan_alpha, "alpha range lo..hi:step");
    sc->add_option("--delta", scan_delta, "delta range lo..hi:step");
    sc->add_option("--nmin", scan_nmin, "minimum system size");
    sc->add_option("--out", scan_out, "CSV output (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*sim)
        {
            // Precedence: flags, then the scenario file, then defaults.
            auto s = ccc::scenario_from_json(read_json_file(scenario_path));
            if (seed_override)
            {
                s.seed = *seed_override;
            }
            sim_params.apply(s.params);
            const auto rep = ccc::validate_scenario(s);
            if (!rep.ok())
            {
                std::cerr << rep.to_json().dump(2) << '\n';
                return 2;
            }
            write_text(trace_out, ccc::trace_to_string(ccc::run(s)));
            return 0;
        }
        if (*chk)
        {
            std::ifstream in(trace_path);
            if (!in)
            {
                throw std::runtime_error("cannot open " + trace_path);
            }
            const auto t = ccc::read_trace(in);
            const auto list = props == "auto" ? ccc::check::applicable_properties(t) : ccc::check::split_props(props);
            std::vector<ccc::check::Verdict> verdicts;
            try
            {
                verdicts = ccc::check::check_all(t, list, budget);
            }
            catch (const ccc::check::MalformedSchedule &e)
            {
                std::cerr << "malformed schedule: " << e.what() << '\n';
                return 3;
            }
            bool ok = true;
            for (const auto &v : verdicts)
            {
                std::cout << v.to_json().dump() << '\n';
                ok = ok && v.pass();
            }
            return ok ? 0 : 1;
        }
        if (*par)
        {
            ccc::ModelParams p;
            par_flags.apply(p);
            const auto rep = ccc::check_constraints(p);
            std::cout << ccc::to_json(rep).dump(2) << '\n';
            return rep.overall ? 0 : 1;
        }
        if (*fz)
        {
            ccc::FuzzConfig cfg;
            cfg.seed = fuzz_seed;
            cfg.runs = runs;
            cfg.shrink = !no_shrink;
            auto &spec = cfg.spec;
            std::tie(spec.nodes_lo, spec.nodes_hi) = parse_int_range(nodes);
            spec.ops_lo = 1;
            spec.ops_hi = ops;
            spec.horizon = ccc::detail::json_time(ccc::json(horizon), ccc::kTicksPerUnit);
            fz_params.apply(spec.params);
            spec.object = ccc::object_kind_from(object);
            spec.lattice = ccc::lattice_kind_from(lattice);
            spec.think_max = ccc::detail::json_time(ccc::json(think), ccc::kTicksPerUnit);
            spec.mix = ccc::check::split_props(mix);
            if (adversary == "random")
            {
                spec.adversary = ccc::CrashAdversary::random_subset;
            }
            else if (adversary == "none-delivered")
            {
                spec.adversary = ccc::CrashAdversary::none_delivered;
            }
            spec.churn_events = churn_events;
            spec.crashes = crashes;
            spec.mutations.drop_store_echo = mutation == "drop_store_echo";
            spec.mutations.skip_store_back = mutation == "skip_store_back";
            if (delay == "uniform")
            {
                spec.delay = ccc::DelayModel::uniform;
            }
            else if (delay == "fixed")
            {
                spec.delay = ccc::DelayModel::fixed;
            }
            else if (delay == "adversarial")
            {
                spec.delay = ccc::DelayModel::adversarial;
            }
            else if (delay == "skewed")
            {
                spec.delay = ccc::DelayModel::skewed;
            }
            cfg.props = ccc::check::split_props(fuzz_props);
            const auto rep = ccc::fuzz(cfg);
            std::cout << rep.to_json().dump(2) << '\n';
            return rep.failures.empty() ? 0 : 1;
        }
        if (*sc)
        {
            ccc::RegionSpec spec;
            spec.alpha = ccc::RationalRange::parse(scan_alpha);
            spec.delta = ccc::RationalRange::parse(scan_delta);
            spec.n_min = scan_nmin;
            write_text(scan_out, ccc::region_csv(ccc::scan_feasible_region(spec)));
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
