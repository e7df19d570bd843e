#pragma once

#include "check/all.hpp"
#include "simulator.hpp"

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

namespace ccc
{
    struct FuzzConfig
    {
        std::uint64_t seed = 1;
        std::int64_t runs = 100;
        RandomSpec spec;                 // per-run seed is overwritten
        std::vector<std::string> props;  // empty: properties applicable to the object
        std::size_t budget = 12;
        bool shrink = true;
        unsigned threads = 0; // 0: hardware concurrency
    };

    struct FuzzFailure
    {
        std::int64_t run = 0;
        Scenario scenario;
        Scenario shrunk;
        std::vector<check::Verdict> verdicts; // failing verdicts of the original scenario
    };

    struct FuzzRun
    {
        std::int64_t run = 0;
        Scenario scenario;
        std::vector<check::Verdict> verdicts;
        std::size_t trace_records = 0;
        std::string error;

        bool pass() const
        {
            return error.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const check::Verdict &v) { return v.pass(); });
        }
    };

    struct FuzzReport
    {
        std::int64_t runs = 0;
        std::vector<FuzzFailure> failures;

        json to_json() const
        {
            json f = json::array();
            for (const auto &x : failures)
            {
                nlohmann::ordered_json vs = nlohmann::ordered_json::array();
                for (const auto &v : x.verdicts)
                {
                    vs.push_back(v.to_json());
                }
                f.push_back(json{{"run", x.run},
                                 {"seed", x.scenario.seed},
                                 {"churn_events", x.scenario.churn.size()},
                                 {"shrunk_churn_events", x.shrunk.churn.size()},
                                 {"shrunk_scenario", scenario_to_json(x.shrunk)},
                                 {"verdicts", json::parse(vs.dump())}});
            }
            return json{{"runs", runs}, {"failures", failures.size()}, {"failed_runs", std::move(f)}};
        }
    };

    /// Simulates a scenario and checks it; exceptions become an error string.
    inline FuzzRun run_and_check(const Scenario &s, const std::vector<std::string> &props, std::size_t budget)
    {
        FuzzRun r;
        r.scenario = s;
        try
        {
            const Trace t = run(s);
            r.trace_records = t.records.size();
            r.verdicts = check::check_all(t, props.empty() ? check::applicable_properties(t) : props, budget);
        }
        catch (const std::exception &e)
        {
            r.error = e.what();
        }
        return r;
    }

    /// Bisection over churn events: drop chunks of directives while the
    /// schedule stays valid and the failure persists.
    inline Scenario shrink_scenario(const Scenario &s, const std::function<bool(const Scenario &)> &fails)
    {
        Scenario cur = s;
        std::size_t chunk = std::max<std::size_t>(1, cur.churn.size() / 2);
        while (!cur.churn.empty())
        {
            bool progress = false;
            for (std::size_t start = 0; start < cur.churn.size();)
            {
                Scenario cand = cur;
                const auto end = std::min(cand.churn.size(), start + chunk);
                cand.churn.erase(cand.churn.begin() + static_cast<std::ptrdiff_t>(start), cand.churn.begin() + static_cast<std::ptrdiff_t>(end));
                if (validate_scenario(cand).ok() && fails(cand))
                {
                    cur = std::move(cand);
                    progress = true;
                }
                else
                {
                    start += chunk;
                }
            }
            if (chunk == 1 && !progress)
            {
                break;
            }
            if (!progress)
            {
                chunk = std::max<std::size_t>(1, chunk / 2);
            }
        }
        return cur;
    }

    /// Generates and checks `runs` scenarios. Runs are independent and fan
    /// out over worker threads; results are collected by run index.
    inline FuzzReport fuzz(const FuzzConfig &cfg, const std::function<void(const FuzzRun &)> &observer = {})
    {
        std::vector<std::uint64_t> seeds;
        Rng rng(cfg.seed);
        for (std::int64_t i = 0; i < cfg.runs; ++i)
        {
            seeds.push_back(rng.next());
        }
        std::vector<FuzzRun> results(static_cast<std::size_t>(cfg.runs));
        std::atomic<std::int64_t> next{0};
        std::mutex observer_mutex;
        auto worker = [&]() {
            for (std::int64_t i = next++; i < cfg.runs; i = next++)
            {
                RandomSpec spec = cfg.spec;
                spec.seed = seeds[static_cast<std::size_t>(i)];
                FuzzRun r;
                try
                {
                    r = run_and_check(generate_scenario(spec), cfg.props, cfg.budget);
                }
                catch (const std::exception &e)
                {
                    r.error = e.what();
                }
                r.run = i;
                if (observer)
                {
                    std::lock_guard lock(observer_mutex);
                    observer(r);
                }
                results[static_cast<std::size_t>(i)] = std::move(r);
            }
        };
        unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
        n = static_cast<unsigned>(std::min<std::int64_t>(n, std::max<std::int64_t>(1, cfg.runs)));
        if (n <= 1)
        {
            worker();
        }
        else
        {
            std::vector<std::thread> pool;
            for (unsigned k = 0; k < n; ++k)
            {
                pool.emplace_back(worker);
            }
            for (auto &t : pool)
            {
                t.join();
            }
        }

        FuzzReport rep;
        rep.runs = cfg.runs;
        for (auto &r : results)
        {
            if (r.pass())
            {
                continue;
            }
            FuzzFailure f;
            f.run = r.run;
            f.scenario = r.scenario;
            for (auto &v : r.verdicts)
            {
                if (!v.pass())
                {
                    f.verdicts.push_back(v);
                }
            }
            if (!r.error.empty())
            {
                check::Verdict err;
                err.property = "error";
                err.add({}, r.error);
                f.verdicts.push_back(std::move(err));
            }
            f.shrunk = cfg.shrink && r.error.empty()
                           ? shrink_scenario(r.scenario, [&](const Scenario &s) { return !run_and_check(s, cfg.props, cfg.budget).pass(); })
                           : r.scenario;
            rep.failures.push_back(std::move(f));
        }
        return rep;
    }
}
