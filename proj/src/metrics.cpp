#include "dppphd/metrics.hpp"

#include "dppphd/errors.hpp"

#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace dppphd {

using Index = Eigen::Index;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void write_opt(std::ostream& os, const std::optional<double>& v) {
    if (v)
        os << *v;
    else
        os << "nan";
}

} // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    Assignment out;
    out.row_to_col.assign(static_cast<size_t>(n), -1);
    if (n == 0) return out;
    if (n > m) throw std::invalid_argument("hungarian: more rows than columns");
    // Potentials u (rows), v (cols); p[j] is the row matched to column j, 1-based with 0 as a sentinel.
    std::vector<double> u(static_cast<size_t>(n + 1), 0.0), v(static_cast<size_t>(m + 1), 0.0);
    std::vector<int> p(static_cast<size_t>(m + 1), 0), way(static_cast<size_t>(m + 1), 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(m + 1), kInf);
        std::vector<char> used(static_cast<size_t>(m + 1), 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = p[static_cast<size_t>(j0)];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    for (int j = 1; j <= m; ++j)
        if (p[static_cast<size_t>(j)] != 0) out.row_to_col[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
    for (int i = 0; i < n; ++i) out.cost += cost(i, out.row_to_col[static_cast<size_t>(i)]);
    return out;
}

double ospa(const PointSet& truth, const PointSet& est, double c, double p) {
    if (c <= 0.0 || p < 1.0) throw std::invalid_argument("ospa: need c > 0 and p >= 1");
    const PointSet& a = truth.size() <= est.size() ? truth : est;
    const PointSet& b = truth.size() <= est.size() ? est : truth;
    const auto n = a.size(), m = b.size();
    if (m == 0) return 0.0;
    Eigen::MatrixXd cost(static_cast<Index>(n), static_cast<Index>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j)
            cost(static_cast<Index>(i), static_cast<Index>(j)) = std::pow(std::min((a[i] - b[j]).norm(), c), p);
    const double matched = n > 0 ? hungarian(cost).cost : 0.0;
    const double total = matched + std::pow(c, p) * static_cast<double>(m - n);
    return std::pow(total / static_cast<double>(m), 1.0 / p);
}

Eigen::MatrixXd min_cost_transport(const Eigen::MatrixXd& cost, const std::vector<long long>& supply,
                                   const std::vector<long long>& demand) {
    const auto n = static_cast<int>(supply.size());
    const auto m = static_cast<int>(demand.size());
    Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);
    std::vector<long long> sup = supply, dem = demand;
    std::vector<std::vector<long long>> f(static_cast<size_t>(n), std::vector<long long>(static_cast<size_t>(m), 0));
    // Successive shortest paths on the residual bipartite graph (Bellman-Ford; negative reverse arcs).
    const int nodes = n + m;
    const double eps = 1e-12 * std::max(1.0, cost.cwiseAbs().maxCoeff());
    while (true) {
        std::vector<double> dist(static_cast<size_t>(nodes), kInf);
        std::vector<int> prev(static_cast<size_t>(nodes), -1);
        for (int i = 0; i < n; ++i)
            if (sup[static_cast<size_t>(i)] > 0) dist[static_cast<size_t>(i)] = 0.0;
        bool changed = true;
        for (int it = 0; it < nodes && changed; ++it) {
            changed = false;
            for (int i = 0; i < n; ++i) {
                const double di = dist[static_cast<size_t>(i)];
                if (di == kInf) continue;
                for (int j = 0; j < m; ++j) {
                    const double nd = di + cost(i, j);
                    if (nd < dist[static_cast<size_t>(n + j)] - eps) {
                        dist[static_cast<size_t>(n + j)] = nd;
                        prev[static_cast<size_t>(n + j)] = i;
                        changed = true;
                    }
                }
            }
            for (int j = 0; j < m; ++j) {
                const double dj = dist[static_cast<size_t>(n + j)];
                if (dj == kInf) continue;
                for (int i = 0; i < n; ++i) {
                    if (f[static_cast<size_t>(i)][static_cast<size_t>(j)] <= 0) continue;
                    const double nd = dj - cost(i, j);
                    if (nd < dist[static_cast<size_t>(i)] - eps) {
                        dist[static_cast<size_t>(i)] = nd;
                        prev[static_cast<size_t>(i)] = n + j;
                        changed = true;
                    }
                }
            }
        }
        int sink = -1;
        for (int j = 0; j < m; ++j)
            if (dem[static_cast<size_t>(j)] > 0 && dist[static_cast<size_t>(n + j)] < kInf &&
                (sink < 0 || dist[static_cast<size_t>(n + j)] < dist[static_cast<size_t>(sink)]))
                sink = n + j;
        if (sink < 0) break;
        long long amount = dem[static_cast<size_t>(sink - n)];
        int v = sink;
        int hops = 0;
        while (prev[static_cast<size_t>(v)] >= 0) {
            if (++hops > nodes) throw std::logic_error("min_cost_transport: cycle in shortest-path tree");
            const int u = prev[static_cast<size_t>(v)];
            if (u >= n) amount = std::min(amount, f[static_cast<size_t>(v)][static_cast<size_t>(u - n)]);
            v = u;
        }
        amount = std::min(amount, sup[static_cast<size_t>(v)]);
        if (amount <= 0) break;
        sup[static_cast<size_t>(v)] -= amount;
        dem[static_cast<size_t>(sink - n)] -= amount;
        v = sink;
        while (prev[static_cast<size_t>(v)] >= 0) {
            const int u = prev[static_cast<size_t>(v)];
            if (u < n)
                f[static_cast<size_t>(u)][static_cast<size_t>(v - n)] += amount;
            else
                f[static_cast<size_t>(v)][static_cast<size_t>(u - n)] -= amount;
            v = u;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) flow(i, j) = static_cast<double>(f[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    return flow;
}

double omat(const PointSet& truth, const PointSet& est, double p) {
    if (truth.empty() || est.empty()) throw EmptySet("omat is undefined for an empty point set");
    const auto n = static_cast<long long>(truth.size());
    const auto m = static_cast<long long>(est.size());
    const long long l = std::lcm(n, m);
    Eigen::MatrixXd cost(n, m);
    for (long long i = 0; i < n; ++i)
        for (long long j = 0; j < m; ++j)
            cost(i, j) = std::pow((truth[static_cast<size_t>(i)] - est[static_cast<size_t>(j)]).norm(), p);
    const Eigen::MatrixXd flow = min_cost_transport(cost, std::vector<long long>(static_cast<size_t>(n), l / n),
                                                    std::vector<long long>(static_cast<size_t>(m), l / m));
    const double total = flow.cwiseProduct(cost).sum() / static_cast<double>(l);
    return std::pow(std::max(0.0, total), 1.0 / p);
}

std::vector<std::pair<int, int>> associate(const Scan& scan, const PointSet& est) {
    std::vector<std::pair<int, int>> out;
    if (est.empty()) return out;
    for (size_t k = 0; k < scan.size(); ++k) {
        const Point2 z = cartesian(scan.detections[k]);
        int best = 0;
        double best_d = (z - est[0]).norm();
        for (size_t e = 1; e < est.size(); ++e) {
            const double d = (z - est[e]).norm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(e);
            }
        }
        out.emplace_back(static_cast<int>(k), best);
    }
    return out;
}

GoodEstimate good_estimate_stats(const Scan& scan, const PointSet& est, const std::vector<Target>& truth) {
    GoodEstimate g;
    const auto pairs = associate(scan, est);
    int good = 0;
    int with_estimate = 0;
    double gain = 0.0;
    for (size_t k = 0; k < scan.size(); ++k) {
        const int link = scan.truth_links[k];
        if (link < 0) continue;
        const auto it = std::find_if(truth.begin(), truth.end(), [&](const Target& t) { return t.id == link; });
        if (it == truth.end()) continue;
        ++g.measurements;
        if (est.empty()) continue;
        const Point2 x(it->state(0), it->state(2));
        const double dm = (cartesian(scan.detections[k]) - x).norm();
        const double de = (est[static_cast<size_t>(pairs[k].second)] - x).norm();
        if (de < dm) ++good;
        if (dm > 0.0) {
            gain += (dm - de) / dm;
            ++with_estimate;
        }
    }
    if (g.measurements > 0) g.ratio = static_cast<double>(good) / g.measurements;
    if (with_estimate > 0) g.gain = gain / with_estimate;
    return g;
}

PointSet weighted_kmeans(const Eigen::MatrixXd& positions, const Eigen::VectorXd& mass, int k, Philox& rng,
                         int restarts) {
    const Index n = positions.cols();
    PointSet best;
    if (k <= 0 || n == 0) return best;
    const Eigen::VectorXd w = mass.cwiseMax(0.0);
    if (!(w.sum() > 0.0)) return best;
    const Index support = (w.array() > 0.0).count();
    k = static_cast<int>(std::min<Index>(k, support));
    double best_cost = kInf;
    for (int r = 0; r < restarts; ++r) {
        Eigen::MatrixXd c(2, k);
        Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, kInf);
        for (int ci = 0; ci < k; ++ci) {
            Eigen::VectorXd score = ci == 0 ? w : Eigen::VectorXd(w.cwiseProduct(d2));
            const double total = score.sum();
            Index pick = 0;
            if (total > 0.0) {
                double u = rng.uniform01() * total;
                for (pick = 0; pick < n - 1; ++pick) {
                    if (u < score(pick)) break;
                    u -= score(pick);
                }
            } else {
                w.maxCoeff(&pick);
            }
            c.col(ci) = positions.col(pick);
            for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (positions.col(i) - c.col(ci)).squaredNorm());
        }
        std::vector<int> label(static_cast<size_t>(n), 0);
        double cost = kInf;
        for (int it = 0; it < 100; ++it) {
            bool moved = false;
            cost = 0.0;
            for (Index i = 0; i < n; ++i) {
                int bl = 0;
                double bd = (positions.col(i) - c.col(0)).squaredNorm();
                for (int ci = 1; ci < k; ++ci) {
                    const double d = (positions.col(i) - c.col(ci)).squaredNorm();
                    if (d < bd) {
                        bd = d;
                        bl = ci;
                    }
                }
                if (label[static_cast<size_t>(i)] != bl) moved = true;
                label[static_cast<size_t>(i)] = bl;
                cost += w(i) * bd;
            }
            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, k);
            Eigen::VectorXd tot = Eigen::VectorXd::Zero(k);
            for (Index i = 0; i < n; ++i) {
                sum.col(label[static_cast<size_t>(i)]) += w(i) * positions.col(i);
                tot(label[static_cast<size_t>(i)]) += w(i);
            }
            for (int ci = 0; ci < k; ++ci)
                if (tot(ci) > 0.0) c.col(ci) = sum.col(ci) / tot(ci);
            if (!moved && it > 0) break;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best.clear();
            for (int ci = 0; ci < k; ++ci) best.emplace_back(c.col(ci));
        }
    }
    return best;
}

PointSet extract_estimates(const Eigen::MatrixXd& positions, const Eigen::VectorXd& mass, double gamma, Philox& rng) {
    if (gamma <= 0.5) return {};
    return weighted_kmeans(positions, mass, static_cast<int>(std::lround(gamma)), rng);
}

PointSet target_positions(const std::vector<Target>& targets) {
    PointSet out;
    for (const auto& t : targets) out.emplace_back(t.state(0), t.state(2));
    return out;
}

void write_metric_header(std::ostream& os) {
    os << "run,t,ospa,omat,good_ratio,gain,count_estimate,count_truth,corr_ab\n";
}

void write_metric_row(std::ostream& os, int run, const MetricRecord& r) {
    const auto old = os.precision(17);
    os << run << ',' << r.t << ',' << r.ospa << ',';
    write_opt(os, r.omat);
    os << ',';
    write_opt(os, r.good_ratio);
    os << ',';
    write_opt(os, r.gain);
    os << ',' << r.count_estimate << ',' << r.count_truth << ',';
    write_opt(os, r.corr_ab);
    os << '\n';
    os.precision(old);
}

} // namespace dppphd
