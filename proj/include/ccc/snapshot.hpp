#pragma once

#include "store_collect.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ccc
{
    /// (node, value) pairs, unique by node, sorted by node.
    using SnapshotView = std::vector<std::pair<NodeId, std::string>>;
    using ScanCounts = std::vector<std::pair<NodeId, std::uint64_t>>;

    /// Per-node value held in the underlying store-collect object by the
    /// atomic snapshot: (val, usqno, ssqno, sview, scounts). val == nullopt is ⊥.
    struct SnapshotCell
    {
        std::optional<std::string> val;
        std::uint64_t usqno = 0;
        std::uint64_t ssqno = 0;
        SnapshotView sview;
        ScanCounts scounts;

        friend bool operator==(const SnapshotCell &, const SnapshotCell &) = default;
    };

    inline json snapshot_view_to_json(const SnapshotView &v)
    {
        json arr = json::array();
        for (const auto &[n, val] : v)
        {
            arr.push_back(json::array({n, val}));
        }
        return arr;
    }

    inline SnapshotView snapshot_view_from_json(const json &j)
    {
        SnapshotView v;
        for (const auto &e : j)
        {
            v.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<std::string>());
        }
        std::sort(v.begin(), v.end());
        return v;
    }

    inline Value encode_cell(const SnapshotCell &c)
    {
        json j;
        j["val"] = c.val ? json(*c.val) : json(nullptr);
        j["usqno"] = c.usqno;
        j["ssqno"] = c.ssqno;
        j["sview"] = snapshot_view_to_json(c.sview);
        json sc = json::array();
        for (const auto &[n, k] : c.scounts)
        {
            sc.push_back(json::array({n, k}));
        }
        j["scounts"] = std::move(sc);
        return Value(j.dump());
    }

    inline SnapshotCell decode_cell(const Value &v)
    {
        const json j = json::parse(v.bytes());
        SnapshotCell c;
        if (!j.at("val").is_null())
        {
            c.val = j.at("val").get<std::string>();
        }
        c.usqno = j.at("usqno").get<std::uint64_t>();
        c.ssqno = j.at("ssqno").get<std::uint64_t>();
        c.sview = snapshot_view_from_json(j.at("sview"));
        for (const auto &e : j.at("scounts"))
        {
            c.scounts.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<std::uint64_t>());
        }
        return c;
    }

    /// Decoded store-collect view of snapshot cells.
    using CellView = std::vector<std::pair<NodeId, SnapshotCell>>;

    inline CellView decode_cells(const View &v)
    {
        CellView out;
        out.reserve(v.size());
        for (const auto &e : v.entries())
        {
            out.emplace_back(e.node, decode_cell(e.value));
        }
        return out;
    }

    /// r(V): the entries whose val is not ⊥.
    inline CellView r_filter(const CellView &v)
    {
        CellView out;
        for (const auto &entry : v)
        {
            if (entry.second.val)
            {
                out.push_back(entry);
            }
        }
        return out;
    }

    /// r(V) applied directly to an encoded store-collect view.
    inline View r_filter(const View &v)
    {
        std::vector<ViewEntry> keep;
        for (const auto &e : v.entries())
        {
            if (decode_cell(e.value).val)
            {
                keep.push_back(e);
            }
        }
        return View::of(std::move(keep));
    }

    inline std::vector<std::pair<NodeId, std::uint64_t>> usqno_projection(const CellView &real)
    {
        std::vector<std::pair<NodeId, std::uint64_t>> out;
        out.reserve(real.size());
        for (const auto &[n, c] : real)
        {
            out.emplace_back(n, c.usqno);
        }
        return out;
    }

    inline SnapshotView val_projection(const CellView &real)
    {
        SnapshotView out;
        out.reserve(real.size());
        for (const auto &[n, c] : real)
        {
            out.emplace_back(n, *c.val);
        }
        return out;
    }

    /// .ssqno of every collected cell, including cells whose val is ⊥.
    inline ScanCounts ssqno_projection(const CellView &all)
    {
        ScanCounts out;
        out.reserve(all.size());
        for (const auto &[n, c] : all)
        {
            out.emplace_back(n, c.ssqno);
        }
        return out;
    }

    struct ScCall
    {
        OpType kind = OpType::none;
        Value value;
    };

    /// The atomic snapshot algorithm for one node, driven by store/collect
    /// completions. Scan: announce ssqno, then double-collect until two
    /// consecutive collects agree on usqnos (direct) or some cell's scounts
    /// carries our ssqno (borrowed). Update: collect ssqnos, embedded scan,
    /// publish the new cell.
    class SnapshotMachine
    {
    public:
        enum class Done
        {
            none,
            update,
            scan,
        };

        struct Step
        {
            std::optional<ScCall> call;
            Done done = Done::none;
            SnapshotView view; // scan result when done == scan
        };

        explicit SnapshotMachine(NodeId self = kNoNode) : m_self(self) {}

        bool idle() const { return m_stage == Stage::idle; }
        const SnapshotCell &published() const { return m_published; }

        Step begin_update(std::string v, Effects &out)
        {
            m_pending_val = std::move(v);
            m_stage = Stage::update_collect;
            (void)out;
            return Step{ScCall{OpType::collect, {}}, Done::none, {}};
        }

        Step begin_scan(Effects &out) { return start_scan(false, out); }

        Step on_result(const ScResult &r, Effects &out)
        {
            switch (m_stage)
            {
            case Stage::update_collect:
                m_scounts = ssqno_projection(decode_cells(r.view));
                return start_scan(true, out);
            case Stage::scan_announce:
                out.note(json{{"sub", "scan"}, {"event", "announced"}, {"ssqno", m_ssqno}});
                m_stage = Stage::scan_first;
                return Step{ScCall{OpType::collect, {}}, Done::none, {}};
            case Stage::scan_first:
                m_v1 = decode_cells(r.view);
                m_stage = Stage::scan_loop;
                return Step{ScCall{OpType::collect, {}}, Done::none, {}};
            case Stage::scan_loop:
                return scan_iteration(r.view, out);
            case Stage::update_publish:
                m_stage = Stage::idle;
                return Step{std::nullopt, Done::update, {}};
            case Stage::idle:
                break;
            }
            return Step{};
        }

    private:
        enum class Stage
        {
            idle,
            update_collect,
            scan_announce,
            scan_first,
            scan_loop,
            update_publish,
        };

        Step start_scan(bool embedded, Effects &out)
        {
            m_embedded = embedded;
            m_failed = 0;
            ++m_ssqno;
            out.note(json{{"sub", "scan"}, {"event", "begin"}, {"ssqno", m_ssqno}, {"embedded", embedded}});
            // Other components keep the values last stored.
            SnapshotCell announce = m_published;
            announce.ssqno = m_ssqno;
            m_published = announce;
            m_stage = Stage::scan_announce;
            return Step{ScCall{OpType::store, encode_cell(announce)}, Done::none, {}};
        }

        Step scan_iteration(const View &collected, Effects &out)
        {
            CellView v2 = std::move(m_v1);
            m_v1 = decode_cells(collected);
            const CellView real1 = r_filter(m_v1);
            const CellView real2 = r_filter(v2);
            const auto usq1 = usqno_projection(real1);
            if (usq1 == usqno_projection(real2))
            {
                json usq = json::array();
                for (const auto &[n, u] : usq1)
                {
                    usq.push_back(json::array({n, u}));
                }
                SnapshotView result = val_projection(real1);
                out.note(json{{"sub", "scan"},
                              {"event", "end"},
                              {"ssqno", m_ssqno},
                              {"embedded", m_embedded},
                              {"mode", "direct"},
                              {"failed", m_failed},
                              {"view", snapshot_view_to_json(result)},
                              {"usqno", std::move(usq)}});
                return finish_scan(std::move(result), out);
            }
            for (const auto &[q, cell] : m_v1)
            {
                const bool saw_us = std::find(cell.scounts.begin(), cell.scounts.end(), std::make_pair(m_self, m_ssqno)) != cell.scounts.end();
                if (saw_us)
                {
                    out.note(json{{"sub", "scan"},
                                  {"event", "end"},
                                  {"ssqno", m_ssqno},
                                  {"embedded", m_embedded},
                                  {"mode", "borrowed"},
                                  {"failed", m_failed},
                                  {"view", snapshot_view_to_json(cell.sview)},
                                  {"from", json::array({q, cell.usqno})}});
                    return finish_scan(cell.sview, out);
                }
            }
            ++m_failed;
            return Step{ScCall{OpType::collect, {}}, Done::none, {}};
        }

        Step finish_scan(SnapshotView result, Effects &out)
        {
            if (!m_embedded)
            {
                m_stage = Stage::idle;
                return Step{std::nullopt, Done::scan, std::move(result)};
            }
            m_sview = std::move(result);
            m_val = std::move(m_pending_val);
            ++m_usqno;
            m_published = SnapshotCell{m_val, m_usqno, m_ssqno, m_sview, m_scounts};
            m_stage = Stage::update_publish;
            out.note(json{{"sub", "update"}, {"event", "publish"}, {"usqno", m_usqno}, {"val", *m_val}});
            return Step{ScCall{OpType::store, encode_cell(m_published)}, Done::none, {}};
        }

        NodeId m_self;
        Stage m_stage = Stage::idle;
        bool m_embedded = false;
        std::uint64_t m_ssqno = 0;
        std::uint64_t m_usqno = 0;
        std::uint64_t m_failed = 0;
        std::optional<std::string> m_val;
        std::string m_pending_val;
        SnapshotView m_sview;
        ScanCounts m_scounts;
        CellView m_v1;
        SnapshotCell m_published;
    };
}
