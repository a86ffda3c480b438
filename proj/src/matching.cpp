#include "vectwin/matching.hpp"

#include <algorithm>

namespace vectwin {

std::vector<RsuId> vehicle_preference(RsuId connected, std::span<const Seconds> queue_snapshot,
                                      const Topology& topo) {
    const auto eligible = eligible_processors(connected, topo);
    std::vector<RsuId> prefs(eligible.begin(), eligible.end());
    // Queue-length ties fall back to the connected RSU first (no pointless
    // forwarding), then ascending id.
    std::stable_sort(prefs.begin(), prefs.end(), [&](RsuId a, RsuId b) {
        const Seconds qa = queue_snapshot[static_cast<std::size_t>(a)];
        const Seconds qb = queue_snapshot[static_cast<std::size_t>(b)];
        if (qa != qb) return qa < qb;
        if ((a == connected) != (b == connected)) return a == connected;
        return a < b;
    });
    return prefs;
}

int rsu_tier(const MatchTask& task, RsuId rsu) {
    if (task.connected == rsu) return 0;
    if (task.delivery == rsu) return 1;
    return 2;
}

Seconds project_queue(Seconds residual, std::span<const Gbit> accepted_inputs,
                      GbitPerSecond compute_rate) {
    Seconds q = residual;
    for (Gbit h : accepted_inputs) q += h / compute_rate;
    return q;
}

MatchResult run_matching(const std::vector<MatchTask>& tasks,
                         std::span<const Seconds> queue_snapshot,
                         std::span<const Seconds> reference_queue, Gbit input_size,
                         const Topology& topo) {
    const int n_rsus = topo.num_rsus();
    if (static_cast<int>(queue_snapshot.size()) != n_rsus ||
        static_cast<int>(reference_queue.size()) != n_rsus)
        throw ContractError("run_matching: per-RSU inputs must cover every RSU");

    struct Proposer {
        const MatchTask* task = nullptr;
        std::vector<RsuId> prefs;
        std::size_t next = 0;     // next preference to propose to
        int proposals = 0;
        bool settled = false;     // terminally assigned (fallback)
        int held_by = -1;         // RSU currently holding the proposal
    };

    std::vector<Proposer> proposers;
    proposers.reserve(tasks.size());
    for (const MatchTask& t : tasks) {
        Proposer p;
        p.task = &t;
        p.prefs = vehicle_preference(t.connected, queue_snapshot, topo);
        proposers.push_back(std::move(p));
    }
    std::stable_sort(proposers.begin(), proposers.end(), [](const Proposer& a, const Proposer& b) {
        return a.task->vehicle < b.task->vehicle;
    });

    MatchResult result;
    std::vector<std::vector<int>> held(static_cast<std::size_t>(n_rsus));  // proposer indices

    auto settle_fallback = [&](Proposer& p) {
        p.settled = true;
        result.processor[p.task->vehicle] = p.task->connected;
        result.proposals[p.task->vehicle] = p.proposals;
        result.fallback[p.task->vehicle] = true;
    };

    for (;;) {
        // Proposal phase: every unheld, unsettled vehicle proposes to its
        // best remaining RSU; an exhausted list falls back to the connected
        // RSU regardless of its queue.
        std::vector<std::vector<int>> incoming(static_cast<std::size_t>(n_rsus));
        bool any = false;
        for (int i = 0; i < static_cast<int>(proposers.size()); ++i) {
            Proposer& p = proposers[static_cast<std::size_t>(i)];
            if (p.settled || p.held_by >= 0) continue;
            if (p.next >= p.prefs.size()) {
                settle_fallback(p);
                continue;
            }
            const RsuId r = p.prefs[p.next++];
            ++p.proposals;
            incoming[static_cast<std::size_t>(r)].push_back(i);
            any = true;
        }
        if (!any) break;

        // Acceptance phase: pool tentative holds with new proposals, keep
        // the best prefix that fits under the reference queue, reject the
        // rest (revoking holds as needed).
        for (int r = 0; r < n_rsus; ++r) {
            auto& in = incoming[static_cast<std::size_t>(r)];
            if (in.empty()) continue;
            std::vector<int> pool = held[static_cast<std::size_t>(r)];
            pool.insert(pool.end(), in.begin(), in.end());
            std::sort(pool.begin(), pool.end(), [&](int a, int b) {
                const Proposer& pa = proposers[static_cast<std::size_t>(a)];
                const Proposer& pb = proposers[static_cast<std::size_t>(b)];
                const int ta = rsu_tier(*pa.task, r);
                const int tb = rsu_tier(*pb.task, r);
                if (ta != tb) return ta < tb;
                return pa.task->vehicle < pb.task->vehicle;
            });

            const Seconds work = input_size / topo.rsu(r).compute_rate;
            Seconds projected = queue_snapshot[static_cast<std::size_t>(r)];
            std::vector<int> kept;
            std::size_t cut = pool.size();
            for (std::size_t j = 0; j < pool.size(); ++j) {
                if (projected + work <= reference_queue[static_cast<std::size_t>(r)]) {
                    kept.push_back(pool[j]);
                    projected += work;
                } else {
                    cut = j;
                    break;
                }
            }
            for (int idx : kept) proposers[static_cast<std::size_t>(idx)].held_by = r;
            for (std::size_t j = cut; j < pool.size(); ++j)
                proposers[static_cast<std::size_t>(pool[j])].held_by = -1;
            held[static_cast<std::size_t>(r)] = std::move(kept);
        }
    }

    for (Proposer& p : proposers) {
        if (p.settled) continue;
        if (p.held_by < 0) throw ContractError("run_matching: unassigned proposer at termination");
        result.processor[p.task->vehicle] = p.held_by;
        result.proposals[p.task->vehicle] = p.proposals;
        result.fallback[p.task->vehicle] = false;
    }
    return result;
}

}  // namespace vectwin
