#include "permadyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "permadyn/alpha_permanent.hpp"
#include "permadyn/errors.hpp"

namespace permadyn {

HopKernel::HopKernel(Shape shape, double radius, double amplitude)
    : shape_(shape), radius_(radius), amplitude_(amplitude) {
    if (!(radius > 0.0)) throw std::invalid_argument("hop kernel radius must be positive");
    if (amplitude < 0.0) throw std::invalid_argument("hop kernel amplitude must be >= 0");
}

double HopKernel::at_radius(double r) const {
    if (r > radius_) return 0.0;
    switch (shape_) {
        case Shape::Indicator:
            return amplitude_;
        case Shape::Gaussian:
            return amplitude_ * std::exp(-0.5 * (3.0 * r / radius_) * (3.0 * r / radius_));
    }
    return 0.0;
}

double HopKernel::operator()(const std::array<double, 3>& z, int dimension) const {
    double s = 0.0;
    for (int axis = 0; axis < dimension; ++axis)
        s += z[static_cast<std::size_t>(axis)] * z[static_cast<std::size_t>(axis)];
    return at_radius(std::sqrt(s));
}

double RateModel::death_rate(double r) const {
    if (r <= r_clamp) return 0.0;
    return std::pow(r, s - 1.0);
}

double RateModel::birth_rate(double r) const {
    if (r <= r_clamp) return 0.0;
    return std::pow(r, s - 1.0) * r;
}

double RateModel::hop_rate(double a, double r_from, double r_to) const {
    if (r_from <= r_clamp || r_to <= r_clamp) return 0.0;
    return a * std::pow(r_from, s - 1.0) * std::pow(r_to, s);
}

BalanceReport check_balance(const RateModel& model, const std::vector<double>& r_values,
                            const std::function<double(int, int)>& a_of) {
    BalanceReport report;
    const int n = static_cast<int>(r_values.size());
    for (int i = 0; i < n; ++i) {
        const double r = r_values[static_cast<std::size_t>(i)];
        const double b = model.birth_rate(r);
        const double d = model.death_rate(r);
        const double scale = std::max({std::abs(b), std::abs(d * r), 1.0});
        report.max_birth_residual =
            std::max(report.max_birth_residual, std::abs(b - d * r) / scale);
        for (int j = 0; j < n; ++j) {
            const double rj = r_values[static_cast<std::size_t>(j)];
            const double cij = model.hop_rate(a_of(i, j), r, rj);
            const double cji = model.hop_rate(a_of(j, i), rj, r);
            const double scale2 = std::max({std::abs(r * cij), std::abs(rj * cji), 1.0});
            report.max_hop_residual =
                std::max(report.max_hop_residual, std::abs(r * cij - rj * cji) / scale2);
        }
    }
    return report;
}

namespace {

struct RateTable {
    std::vector<double> rates;
    std::vector<Event> proposals;
    double total = 0.0;

    void push(double rate, Event ev, double cap) {
        if (rate <= 0.0) return;
        if (rate > cap)
            throw RateOverflow("single event rate " + std::to_string(rate) +
                               " exceeds cap; intensity near the clamp with s < 1");
        rates.push_back(rate);
        proposals.push_back(ev);
        total += rate;
    }
};

/// Neighbor cells within the hop support, with kernel values; excludes the
/// center (a same-cell hop is the identity).
struct HopNeighbors {
    std::vector<std::vector<std::pair<int, double>>> of_cell;
};

HopNeighbors hop_neighbors(const GridSpec& grid, const HopKernel& hop) {
    HopNeighbors out;
    const int n = grid.total_cells();
    out.of_cell.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double a = hop(grid.displacement(i, j), grid.dimension());
            if (a > 0.0) out.of_cell[static_cast<std::size_t>(i)].push_back({j, a});
        }
    }
    return out;
}

template <typename RateBuilder>
Trajectory run_ctmc(const Configuration& initial, const GridSpec& grid,
                    const SimulationOptions& opts, Rng& rng, RateBuilder&& build_rates) {
    Trajectory traj;
    traj.initial = initial;
    traj.occupancy_time.assign(static_cast<std::size_t>(grid.total_cells()), 0.0);
    Configuration gamma = initial;
    double t = 0.0;
    long n_events = 0;
    while (t < opts.horizon && n_events < opts.max_events) {
        RateTable table = build_rates(gamma, traj);
        if (table.total <= 0.0) break;  // absorbing state
        const double wait = rng.exponential(table.total);
        const double t_next = t + wait;
        const double slice = std::min(t_next, opts.horizon) - t;
        for (int c = 0; c < gamma.n_cells(); ++c)
            traj.occupancy_time[static_cast<std::size_t>(c)] += slice * gamma.count(c);
        if (t_next >= opts.horizon) {
            t = opts.horizon;
            break;
        }
        t = t_next;
        double pick = rng.uniform() * table.total;
        std::size_t chosen = 0;
        for (; chosen + 1 < table.rates.size(); ++chosen) {
            pick -= table.rates[chosen];
            if (pick <= 0.0) break;
        }
        Event ev = table.proposals[chosen];
        ev.time = t;
        switch (ev.kind) {
            case Event::Kind::Birth:
                gamma.add_point(ev.to);
                break;
            case Event::Kind::Death:
                gamma.remove_point(ev.from);
                break;
            case Event::Kind::Hop:
                gamma.hop_point(ev.from, ev.to);
                break;
        }
        if (opts.record_events) traj.events.push_back(ev);
        ++n_events;
    }
    if (t < opts.horizon) {
        // absorbing or event-capped: account for the remaining stretch
        for (int c = 0; c < gamma.n_cells(); ++c)
            traj.occupancy_time[static_cast<std::size_t>(c)] +=
                (opts.horizon - t) * gamma.count(c);
    }
    traj.final_time = opts.horizon;
    return traj;
}

} // namespace

Trajectory simulate_glauber(const Configuration& initial, const GridSpec& grid,
                            const PapangelouModel& model, const RateModel& rates,
                            const SimulationOptions& opts, Rng& rng) {
    const double dv = grid.cell_volume();
    return run_ctmc(initial, grid, opts, rng, [&](const Configuration& gamma, Trajectory& traj) {
        RateTable table;
        Configuration less = gamma;
        for (int c = 0; c < gamma.n_cells(); ++c) {
            if (gamma.count(c) == 0) continue;
            less.remove_point(c);
            const double d = rates.death_rate(model.r_add(c, less));
            less.add_point(c);
            table.push(gamma.count(c) * d,
                       Event{0.0, Event::Kind::Death, c, -1}, rates.rate_cap);
        }
        if (gamma.total() >= opts.total_cap) {
            ++traj.capped_births;
        } else {
            for (int c = 0; c < gamma.n_cells(); ++c) {
                const double b = rates.birth_rate(model.r_add(c, gamma));
                table.push(dv * b, Event{0.0, Event::Kind::Birth, -1, c}, rates.rate_cap);
            }
        }
        return table;
    });
}

Trajectory simulate_kawasaki(const Configuration& initial, const GridSpec& grid,
                             const PapangelouModel& model, const RateModel& rates,
                             const HopKernel& hop, const SimulationOptions& opts, Rng& rng) {
    const double dv = grid.cell_volume();
    const HopNeighbors neighbors = hop_neighbors(grid, hop);
    return run_ctmc(initial, grid, opts, rng, [&](const Configuration& gamma, Trajectory&) {
        RateTable table;
        Configuration less = gamma;
        for (int c = 0; c < gamma.n_cells(); ++c) {
            if (gamma.count(c) == 0) continue;
            less.remove_point(c);
            const double r_from = model.r_add(c, less);
            if (r_from > rates.r_clamp) {
                for (const auto& [j, a] : neighbors.of_cell[static_cast<std::size_t>(c)]) {
                    const double r_to = model.r_add(j, less);
                    const double rate = rates.hop_rate(a, r_from, r_to);
                    table.push(gamma.count(c) * dv * rate,
                               Event{0.0, Event::Kind::Hop, c, j}, rates.rate_cap);
                }
            }
            less.add_point(c);
        }
        return table;
    });
}

int TruncatedSpace::index_of(const Configuration& gamma) const {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == gamma) return static_cast<int>(i);
    return -1;
}

TruncatedSpace enumerate_truncated_space(const GridSpec& grid, int n_max) {
    TruncatedSpace space;
    space.n_max = n_max;
    const int m = grid.total_cells();
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    // lexicographic enumeration of count vectors with total <= n_max
    std::function<void(int, int)> rec = [&](int cell, int remaining) {
        if (cell == m) {
            space.states.emplace_back(counts);
            if (space.states.size() > 20000)
                throw StateSpaceTooLarge("truncated space exceeds 20000 states");
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[static_cast<std::size_t>(cell)] = c;
            rec(cell + 1, remaining - c);
        }
        counts[static_cast<std::size_t>(cell)] = 0;
    };
    rec(0, n_max);
    return space;
}

GeneratorResult build_generator(const TruncatedSpace& space, const GridSpec& grid,
                                const PapangelouModel& model, const RateModel& rates,
                                DynamicsKind kind, const HopKernel* hop) {
    const int n_states = static_cast<int>(space.states.size());
    const double dv = grid.cell_volume();
    GeneratorResult out;
    out.q = Eigen::MatrixXd::Zero(n_states, n_states);

    std::map<std::vector<int>, int> index;
    for (int i = 0; i < n_states; ++i) index[space.states[static_cast<std::size_t>(i)].counts()] = i;
    auto lookup = [&](const Configuration& gamma) {
        auto it = index.find(gamma.counts());
        return it == index.end() ? -1 : it->second;
    };

    HopNeighbors neighbors;
    if (kind == DynamicsKind::Kawasaki) {
        if (hop == nullptr) throw std::invalid_argument("Kawasaki generator needs a hop kernel");
        neighbors = hop_neighbors(grid, *hop);
    }

    for (int si = 0; si < n_states; ++si) {
        const Configuration& gamma = space.states[static_cast<std::size_t>(si)];
        Configuration work = gamma;
        if (kind == DynamicsKind::Glauber) {
            for (int c = 0; c < gamma.n_cells(); ++c) {
                if (gamma.count(c) > 0) {
                    work.remove_point(c);
                    const double d = rates.death_rate(model.r_add(c, work));
                    const double rate = gamma.count(c) * d;
                    if (rate > rates.rate_cap) throw RateOverflow("generator death rate exceeds cap");
                    out.q(si, lookup(work)) += rate;
                    work.add_point(c);
                }
                if (gamma.total() < space.n_max) {
                    const double b = rates.birth_rate(model.r_add(c, gamma));
                    const double rate = dv * b;
                    if (rate > rates.rate_cap) throw RateOverflow("generator birth rate exceeds cap");
                    work.add_point(c);
                    out.q(si, lookup(work)) += rate;
                    work.remove_point(c);
                } else if (gamma.total() == space.n_max) {
                    ++out.deleted_top_births;
                }
            }
        } else {
            for (int c = 0; c < gamma.n_cells(); ++c) {
                if (gamma.count(c) == 0) continue;
                work.remove_point(c);
                const double r_from = model.r_add(c, work);
                for (const auto& [j, a] : neighbors.of_cell[static_cast<std::size_t>(c)]) {
                    const double r_to = model.r_add(j, work);
                    const double rate = gamma.count(c) * dv * rates.hop_rate(a, r_from, r_to);
                    if (rate > rates.rate_cap) throw RateOverflow("generator hop rate exceeds cap");
                    if (rate > 0.0) {
                        work.add_point(j);
                        out.q(si, lookup(work)) += rate;
                        work.remove_point(j);
                    }
                }
                work.add_point(c);
            }
        }
    }
    for (int si = 0; si < n_states; ++si) {
        out.q(si, si) = 0.0;
        out.q(si, si) = -out.q.row(si).sum();
    }
    return out;
}

double reversibility_check(const Eigen::MatrixXd& q, const std::vector<double>& weights) {
    const int n = static_cast<int>(q.rows());
    if (static_cast<int>(weights.size()) != n)
        throw std::invalid_argument("weights size does not match generator");
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double flow_ij = weights[static_cast<std::size_t>(i)] * q(i, j);
            const double flow_ji = weights[static_cast<std::size_t>(j)] * q(j, i);
            if (flow_ij == 0.0 && flow_ji == 0.0) continue;
            const double residual =
                std::abs(flow_ij - flow_ji) / std::max({flow_ij, flow_ji, 1e-300});
            worst = std::max(worst, residual);
        }
    }
    return worst;
}

FormMassEstimate estimate_form_mass(const std::vector<ProcessSample>& samples,
                                    const GridSpec& grid, const PapangelouModel& model,
                                    const RateModel& rates, const HopKernel& hop,
                                    const std::vector<int>& window, int max_points) {
    std::vector<bool> in_window(static_cast<std::size_t>(grid.total_cells()), false);
    for (int c : window) in_window[static_cast<std::size_t>(c)] = true;
    const HopNeighbors neighbors = hop_neighbors(grid, hop);
    const double dv = grid.cell_volume();

    CompensatedSum death_sum, death_sq, hop_sum, hop_sq;
    long used = 0, skipped = 0;
    for (const auto& s : samples) {
        if (s.gamma.total() > max_points) {
            ++skipped;
            continue;
        }
        double death_part = 0.0;
        double hop_part = 0.0;
        Configuration less = s.gamma;
        for (int c = 0; c < s.gamma.n_cells(); ++c) {
            if (s.gamma.count(c) == 0) continue;
            less.remove_point(c);
            const double r_from = model.r_add(c, less);
            if (in_window[static_cast<std::size_t>(c)])
                death_part += s.gamma.count(c) * rates.death_rate(r_from);
            for (const auto& [j, a] : neighbors.of_cell[static_cast<std::size_t>(c)]) {
                const double indicator =
                    (in_window[static_cast<std::size_t>(c)] ? 1.0 : 0.0) +
                    (in_window[static_cast<std::size_t>(j)] ? 1.0 : 0.0);
                if (indicator == 0.0) continue;
                const double r_to = model.r_add(j, less);
                hop_part += s.gamma.count(c) * dv * rates.hop_rate(a, r_from, r_to) * indicator;
            }
            less.add_point(c);
        }
        death_sum.add(death_part);
        death_sq.add(death_part * death_part);
        hop_sum.add(hop_part);
        hop_sq.add(hop_part * hop_part);
        ++used;
    }
    if (used == 0) throw DegenerateWeight("all samples exceeded the point cap");
    const double n = static_cast<double>(used);
    auto finish = [&](const CompensatedSum& sum, const CompensatedSum& sq) {
        const double mean = sum.value() / n;
        const double var = std::max(0.0, sq.value() / n - mean * mean);
        return MomentEstimate{mean, std::sqrt(var / n)};
    };
    FormMassEstimate out;
    out.death_part = finish(death_sum, death_sq);
    out.hop_part = finish(hop_sum, hop_sq);
    out.skipped = skipped;
    return out;
}

} // namespace permadyn
