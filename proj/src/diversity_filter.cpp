// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/diversity_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "vicl/model_gateway.hpp"

namespace vicl {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                                    std::to_string(v.size()) + ")");
    return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

namespace {

std::vector<std::size_t> order_by_id(std::span<const EmbeddedRecord> records) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].record.id() < records[b].record.id(); });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (records[order[i]].record.id() == records[order[i - 1]].record.id())
            throw std::invalid_argument("duplicate record id '" + records[order[i]].record.id() + "'");
    return order;
}

}  // namespace

std::vector<ClusterAssignment> cluster(std::span<const EmbeddedRecord> records, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("cluster threshold must lie in (0, 1)");
    for (const auto& r : records) {
        const double norm = std::sqrt(cosine_similarity(r.vector, r.vector));
        if (std::abs(norm - 1.0) > 1e-6)
            throw std::invalid_argument("embedding of '" + r.record.id() + "' is not unit-norm");
    }
    std::vector<ClusterAssignment> clusters;
    std::vector<std::size_t> leaders;  // index into records, parallel to clusters
    for (std::size_t idx : order_by_id(records)) {
        const auto& rec = records[idx];
        auto home = std::find_if(leaders.begin(), leaders.end(), [&](std::size_t leader) {
            return cosine_similarity(records[leader].vector, rec.vector) >= threshold;
        });
        if (home == leaders.end()) {
            ClusterAssignment c;
            c.cluster_id = clusters.size();
            c.leader = c.representative = rec.record.id();
            c.members.push_back(rec.record.id());
            clusters.push_back(std::move(c));
            leaders.push_back(idx);
        } else {
            clusters[static_cast<std::size_t>(home - leaders.begin())].members.push_back(rec.record.id());
        }
    }
    return clusters;
}

std::vector<PromptRecord> select_representatives(std::vector<ClusterAssignment>& clusters,
                                                 std::span<const EmbeddedRecord> records, std::size_t cap) {
    if (cap == 0) throw std::invalid_argument("select_representatives: cap must be >= 1");
    std::map<std::string, const EmbeddedRecord*> by_id;
    for (const auto& r : records) by_id[r.record.id()] = &r;
    auto lookup = [&](const std::string& id) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw std::invalid_argument("cluster member '" + id + "' has no record");
        return it->second;
    };

    for (auto& c : clusters) {
        if (c.members.size() == 1) {
            c.representative = c.members.front();
            continue;
        }
        double best = 0;
        std::string best_id;
        for (const auto& id : c.members) {  // members are sorted, so the first minimum wins ties
            const auto* self = lookup(id);
            double sum = 0;
            for (const auto& other : c.members)
                if (other != id) sum += cosine_similarity(self->vector, lookup(other)->vector);
            const double mean = sum / static_cast<double>(c.members.size() - 1);
            if (best_id.empty() || mean < best) {
                best = mean;
                best_id = id;
            }
        }
        c.representative = best_id;
    }

    std::vector<const ClusterAssignment*> ranked;
    for (const auto& c : clusters) ranked.push_back(&c);
    if (ranked.size() > cap) {
        std::sort(ranked.begin(), ranked.end(), [](const ClusterAssignment* a, const ClusterAssignment* b) {
            if (a->members.size() != b->members.size()) return a->members.size() > b->members.size();
            return a->representative < b->representative;
        });
        ranked.resize(cap);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const ClusterAssignment* a, const ClusterAssignment* b) { return a->representative < b->representative; });

    std::vector<PromptRecord> out;
    for (const auto* c : ranked) {
        const auto* r = lookup(c->representative);
        PromptRecord kept = r->record;
        kept.embedding = r->vector;
        out.push_back(std::move(kept));
    }
    return out;
}

DedupResult deduplicate(std::vector<PromptRecord> records, ModelClient* embedder, double threshold, std::size_t cap) {
    DedupResult result;
    if (records.empty()) return result;

    std::vector<std::string> missing;
    for (const auto& r : records)
        if (!r.embedding) missing.push_back(r.text());
    if (!missing.empty()) {
        if (!embedder) throw std::invalid_argument("records lack embeddings and no embedder is configured");
        auto vectors = embedder->embed_text(missing);
        std::size_t next = 0;
        for (auto& r : records)
            if (!r.embedding) r.embedding = std::move(vectors[next++]);
    }

    std::vector<EmbeddedRecord> embedded;
    embedded.reserve(records.size());
    const std::size_t dim = records.front().embedding->size();
    for (auto& r : records) {
        if (r.embedding->size() != dim)
            throw std::invalid_argument("record '" + r.id() + "' has an embedding of a different dimension");
        std::vector<double> v = *r.embedding;
        embedded.push_back({std::move(r), std::move(v)});
    }
    result.clusters = cluster(embedded, threshold);
    result.kept = select_representatives(result.clusters, embedded, cap);
    return result;
}

}  // namespace vicl
