#pragma once

#include "knowledge.hpp"
#include "lattice.hpp"
#include "liveness.hpp"
#include "objects.hpp"
#include "regularity.hpp"
#include "snapshot.hpp"

#include <sstream>

namespace ccc::check
{
    inline const std::vector<std::string> &known_properties()
    {
        static const std::vector<std::string> props{"regularity", "snapshot", "lattice", "liveness", "knowledge", "objects"};
        return props;
    }

    /// Properties that make sense for the object kind recorded in the trace.
    inline std::vector<std::string> applicable_properties(const Trace &t)
    {
        const auto object = t.meta().value("object", std::string("store_collect"));
        std::vector<std::string> out{"liveness", "knowledge"};
        if (object == "store_collect")
        {
            out.insert(out.begin(), "regularity");
        }
        else if (object == "snapshot")
        {
            out.insert(out.begin(), "snapshot");
        }
        else if (object == "lattice")
        {
            out.insert(out.begin(), "lattice");
        }
        else
        {
            out.insert(out.begin(), "objects");
        }
        return out;
    }

    /// Runs one named property; "snapshot" expands to linearizability plus the
    /// direct-scan and borrowed-scan lemmas.
    inline std::vector<Verdict> check_property(const Trace &t, const std::string &prop, std::size_t budget = 12)
    {
        if (prop == "regularity")
        {
            return {check_regularity(t)};
        }
        if (prop == "snapshot")
        {
            const auto notes = snapshot_notes(t);
            return {check_snapshot_linearizable(t, budget), check_direct_scan_comparability(notes), check_borrowed_scan_containment(notes)};
        }
        if (prop == "lattice")
        {
            const auto notes = snapshot_notes(t);
            return {check_lattice(t), check_direct_scan_comparability(notes), check_borrowed_scan_containment(notes)};
        }
        if (prop == "liveness")
        {
            return {check_liveness(t)};
        }
        if (prop == "knowledge")
        {
            return {check_knowledge_lemmas(t)};
        }
        if (prop == "objects")
        {
            return {check_objects(t)};
        }
        throw std::invalid_argument("unknown property: " + prop);
    }

    inline std::vector<Verdict> check_all(const Trace &t, const std::vector<std::string> &props, std::size_t budget = 12)
    {
        std::vector<Verdict> out;
        for (const auto &p : props)
        {
            for (auto &v : check_property(t, p, budget))
            {
                out.push_back(std::move(v));
            }
        }
        return out;
    }

    inline std::vector<std::string> split_props(const std::string &csv)
    {
        std::vector<std::string> out;
        std::stringstream ss(csv);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            if (!item.empty())
            {
                out.push_back(item);
            }
        }
        return out;
    }
}
