#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <set>

#include "bessopt/errors.hpp"
#include "bessopt/problem.hpp"

namespace bessopt::optimizer {

std::vector<int> all_buses(const grid::PowerSystemCase& c) {
    std::vector<int> ids;
    for (const auto& b : c.buses) ids.push_back(b.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<int> reduce_candidates(const grid::PowerSystemCase& c, int m, std::vector<std::string>* warnings) {
    if (m < 0) throw DomainError("candidate neighbourhood size must be non-negative");
    const grid::BusIndex index(c);
    const std::size_t n = c.buses.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        const auto i = index.at(br.from_bus);
        const auto j = index.at(br.to_bus);
        const double w = std::abs(Complex(br.r, br.x));
        adj[i].emplace_back(j, w);
        adj[j].emplace_back(i, w);
    }
    std::set<int> generator_buses;
    for (const auto& g : c.generators) generator_buses.insert(g.bus);

    std::set<int> chosen(generator_buses);
    std::vector<bool> reached(n, false);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int gbus : generator_buses) {
        std::vector<double> dist(n, inf);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        const auto src = index.at(gbus);
        dist[src] = 0.0;
        queue.emplace(0.0, src);
        while (!queue.empty()) {
            const auto [d, u] = queue.top();
            queue.pop();
            if (d > dist[u]) continue;
            for (const auto& [v, w] : adj[u]) {
                if (d + w < dist[v]) {
                    dist[v] = d + w;
                    queue.emplace(dist[v], v);
                }
            }
        }
        std::vector<std::pair<double, int>> ranked;
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] < inf) reached[i] = true;
            if (dist[i] < inf && generator_buses.count(c.buses[i].id) == 0) {
                ranked.emplace_back(dist[i], c.buses[i].id);
            }
        }
        std::sort(ranked.begin(), ranked.end());
        for (std::size_t k = 0; k < ranked.size() && k < static_cast<std::size_t>(m); ++k) {
            chosen.insert(ranked[k].second);
        }
    }
    if (warnings != nullptr) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reached[i]) {
                warnings->push_back("bus " + std::to_string(c.buses[i].id) + " is not connected to any generator");
            }
        }
    }
    return {chosen.begin(), chosen.end()};
}

} // namespace bessopt::optimizer
