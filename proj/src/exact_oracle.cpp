#include "dppphd/exact_oracle.hpp"

#include "dppphd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dppphd {

namespace {

constexpr int kMaxJointStates = 8;
constexpr int kMaxMeas = 6;
constexpr int kMaxConfig = 16;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double multiplicity_factorial(const Configuration& c) {
    double f = 1.0;
    size_t i = 0;
    while (i < c.size()) {
        size_t j = i;
        while (j < c.size() && c[j] == c[i]) ++j;
        f *= factorial(static_cast<int>(j - i));
        i = j;
    }
    return f;
}

double weight_product(const GridSpec& g, const Configuration& c) {
    double w = 1.0;
    for (int i : c) w *= g.weights(i);
    return w;
}

/// Removes one copy of each element of `fixed` from `m`; false if not contained.
bool remove_fixed(const Configuration& m, const Configuration& fixed, Configuration& rest) {
    rest = m;
    for (int f : fixed) {
        auto it = std::find(rest.begin(), rest.end(), f);
        if (it == rest.end()) return false;
        rest.erase(it);
    }
    return true;
}

/// Distinct values with multiplicities.
struct Counts {
    std::vector<int> value;
    std::vector<int> count;
};

Counts to_counts(const Configuration& c) {
    Counts out;
    for (int v : c) {
        if (!out.value.empty() && out.value.back() == v)
            ++out.count.back();
        else {
            out.value.push_back(v);
            out.count.push_back(1);
        }
    }
    return out;
}

/// Sum over ordered prefixes assigned to the measurements in `s` (drawn from the multiset),
/// times prod q^c / c! over the remaining multiplicities.
double sequence_sum(const ObservationModel& obs, Counts& rc, const std::vector<int>& s, size_t pos) {
    if (pos == s.size()) {
        double v = 1.0;
        for (size_t k = 0; k < rc.value.size(); ++k)
            v *= std::pow(obs.q(rc.value[k]), rc.count[k]) / factorial(rc.count[k]);
        return v;
    }
    double total = 0.0;
    for (size_t k = 0; k < rc.value.size(); ++k) {
        if (rc.count[k] == 0) continue;
        const double l = obs.lt(s[pos], rc.value[k]);
        if (l == 0.0) continue;
        --rc.count[k];
        total += l * sequence_sum(obs, rc, s, pos + 1);
        ++rc.count[k];
    }
    return total;
}

/// Sum over measurement subsets S, |S| <= |rest|, of prod_{j not in S} l_c(z_j) times the sequence sum.
double association_sum(const ObservationModel& obs, const Configuration& rest, const IndexSet& meas) {
    const int m = static_cast<int>(meas.size());
    const int p = static_cast<int>(rest.size());
    Counts rc = to_counts(rest);
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> s;
        double clutter = 1.0;
        for (int j = 0; j < m; ++j) {
            if (mask & (1u << j))
                s.push_back(meas[static_cast<size_t>(j)]);
            else
                clutter *= obs.l_c(meas[static_cast<size_t>(j)]);
        }
        if (static_cast<int>(s.size()) > p || clutter == 0.0) continue;
        total += clutter * sequence_sum(obs, rc, s, 0);
    }
    return total;
}

void check_sizes(const FiniteProcess& prior, const IndexSet& meas, int n_max) {
    if (static_cast<int>(meas.size()) > kMaxMeas) throw SizeError("too many measurements for the oracle");
    if (n_max > kMaxConfig) throw SizeError("n_max exceeds oracle bound");
    for (const auto& [c, v] : prior.janossy)
        if (static_cast<int>(c.size()) > n_max && v != 0.0)
            throw SizeError("prior has mass beyond n_max");
}

/// The common series: sum over configurations containing `fixed`.
double upsilon(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
               const Configuration& fixed, int n_max) {
    check_sizes(prior, meas, n_max);
    double total = 0.0;
    Configuration rest;
    for (const auto& [c, j] : prior.janossy) {
        if (j == 0.0 || static_cast<int>(c.size()) > n_max) continue;
        if (!remove_fixed(c, fixed, rest)) continue;
        total += j * weight_product(prior.grid, rest) * association_sum(obs, rest, meas);
    }
    return total;
}

IndexSet without(const IndexSet& meas, std::vector<size_t> drop) {
    IndexSet out;
    for (size_t k = 0; k < meas.size(); ++k)
        if (std::find(drop.begin(), drop.end(), k) == drop.end()) out.push_back(meas[k]);
    return out;
}

void enumerate_multisets(int n_points, int max_size, Configuration& cur, int start,
                         const std::function<void(const Configuration&)>& f) {
    f(cur);
    if (static_cast<int>(cur.size()) == max_size) return;
    for (int i = start; i < n_points; ++i) {
        cur.push_back(i);
        enumerate_multisets(n_points, max_size, cur, i, f);
        cur.pop_back();
    }
}

std::vector<char> membership(const IndexSet& s, Index n) {
    std::vector<char> in(static_cast<size_t>(n), 0);
    for (int i : s) in[static_cast<size_t>(i)] = 1;
    return in;
}

} // namespace

// ---- FiniteProcess ----

double FiniteProcess::density(const Configuration& c) const {
    auto it = janossy.find(c);
    return it == janossy.end() ? 0.0 : it->second;
}

double FiniteProcess::probability(const Configuration& c) const {
    return density(c) * weight_product(grid, c) / multiplicity_factorial(c);
}

double FiniteProcess::total_mass() const {
    double t = 0.0;
    for (const auto& [c, v] : janossy) t += v * weight_product(grid, c) / multiplicity_factorial(c);
    return t;
}

int FiniteProcess::max_size() const {
    int n = 0;
    for (const auto& [c, v] : janossy)
        if (v != 0.0) n = std::max(n, static_cast<int>(c.size()));
    return n;
}

FiniteProcess FiniteProcess::from_dpp(const DiscretizedKernel& k, const KernelOptions& opt) {
    const Index n = k.size();
    if (n > kMaxConfig) throw SizeError("grid too large for subset enumeration");
    FiniteProcess fp;
    fp.grid = k.grid;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Configuration c;
        for (Index i = 0; i < n; ++i)
            if (mask & (1u << i)) c.push_back(static_cast<int>(i));
        const double mass = janossy_density_dpp(k, c, opt);
        fp.janossy[c] = mass / weight_product(k.grid, c);
    }
    return fp;
}

FiniteProcess FiniteProcess::poisson(const GridSpec& g, const Eigen::VectorXd& intensity, int n_max) {
    if (n_max > kMaxConfig) throw SizeError("n_max exceeds oracle bound");
    FiniteProcess fp;
    fp.grid = g;
    const double void_prob = std::exp(-intensity.dot(g.weights));
    Configuration cur;
    enumerate_multisets(static_cast<int>(g.size()), n_max, cur, 0, [&](const Configuration& c) {
        double v = void_prob;
        for (int i : c) v *= intensity(i);
        fp.janossy[c] = v;
    });
    return fp;
}

FiniteProcess FiniteProcess::from_probabilities(const GridSpec& g, const std::map<Configuration, double>& probs) {
    FiniteProcess fp;
    fp.grid = g;
    for (const auto& [c, p] : probs) fp.janossy[c] = p * multiplicity_factorial(c) / weight_product(g, c);
    return fp;
}

// ---- Formula path ----

double joint_janossy(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& states,
                     const IndexSet& meas, JointForm form) {
    const int n = static_cast<int>(states.size());
    const int m = static_cast<int>(meas.size());
    if (n > kMaxJointStates || m > kMaxMeas) throw SizeError("joint Janossy bound exceeded");
    Configuration sorted = states;
    std::sort(sorted.begin(), sorted.end());
    const double j = prior.density(sorted);
    if (j == 0.0) return 0.0;

    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> s;
        double clutter = 1.0;
        for (int k = 0; k < m; ++k) {
            if (mask & (1u << k))
                s.push_back(meas[static_cast<size_t>(k)]);
            else
                clutter *= obs.l_c(meas[static_cast<size_t>(k)]);
        }
        const int ns = static_cast<int>(s.size());
        if (ns > n) continue;
        // Lexicographic enumeration of injections pi: S -> {0..n-1}.
        double inj_sum = 0.0;
        std::vector<int> pi(static_cast<size_t>(ns), 0);
        std::vector<char> used(static_cast<size_t>(n), 0);
        std::function<void(int, double)> rec = [&](int pos, double acc) {
            if (pos == ns) {
                double miss = 1.0;
                for (int t = 0; t < n; ++t)
                    if (!used[static_cast<size_t>(t)]) miss *= obs.q(states[static_cast<size_t>(t)]);
                inj_sum += acc * miss;
                return;
            }
            for (int t = 0; t < n; ++t) {
                if (used[static_cast<size_t>(t)]) continue;
                used[static_cast<size_t>(t)] = 1;
                rec(pos + 1, acc * obs.lt(s[static_cast<size_t>(pos)], states[static_cast<size_t>(t)]));
                used[static_cast<size_t>(t)] = 0;
            }
        };
        rec(0, 1.0);
        const double pref = form == JointForm::factorial_prefactor ? factorial(n) / factorial(n - ns) : 1.0;
        total += pref * clutter * inj_sum;
    }
    return j * total;
}

double measurement_janossy(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas, int n_max) {
    return upsilon(prior, obs, meas, {}, n_max);
}

double corrector_upsilon1(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas, int x,
                          int n_max) {
    return upsilon(prior, obs, meas, {x}, n_max);
}

double corrector_upsilon2(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas, int x, int y,
                          int n_max) {
    return upsilon(prior, obs, meas, {x, y}, n_max);
}

Correctors compute_correctors(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
                              int n_max, bool second_order) {
    const Index n = prior.grid.size();
    const size_t m = meas.size();
    Correctors c;
    c.j_xi = measurement_janossy(prior, obs, meas, n_max);
    if (!(c.j_xi > 0.0)) throw DegenerateIntensity("measurement Janossy density vanishes");
    c.l1.resize(n);
    c.l1z.resize(n, static_cast<Index>(m));
    for (Index x = 0; x < n; ++x) {
        c.l1(x) = corrector_upsilon1(prior, obs, meas, static_cast<int>(x), n_max) / c.j_xi;
        for (size_t k = 0; k < m; ++k)
            c.l1z(x, static_cast<Index>(k)) =
                corrector_upsilon1(prior, obs, without(meas, {k}), static_cast<int>(x), n_max) / c.j_xi;
    }
    if (!second_order) return c;
    c.l2.resize(n, n);
    c.l2z.assign(m, Eigen::MatrixXd::Zero(n, n));
    c.l2zz.assign(m, std::vector<Eigen::MatrixXd>(m, Eigen::MatrixXd::Zero(n, n)));
    for (Index x = 0; x < n; ++x) {
        for (Index y = x; y < n; ++y) {
            const int xi = static_cast<int>(x), yi = static_cast<int>(y);
            c.l2(x, y) = c.l2(y, x) = corrector_upsilon2(prior, obs, meas, xi, yi, n_max) / c.j_xi;
            for (size_t k = 0; k < m; ++k) {
                c.l2z[k](x, y) = c.l2z[k](y, x) =
                    corrector_upsilon2(prior, obs, without(meas, {k}), xi, yi, n_max) / c.j_xi;
                for (size_t l = 0; l < m; ++l) {
                    if (l == k) continue;
                    c.l2zz[k][l](x, y) = c.l2zz[k][l](y, x) =
                        corrector_upsilon2(prior, obs, without(meas, {k, l}), xi, yi, n_max) / c.j_xi;
                }
            }
        }
    }
    return c;
}

Eigen::VectorXd posterior_intensity_exact(const FiniteProcess& prior, const ObservationModel& obs,
                                          const IndexSet& meas, int n_max) {
    const Correctors c = compute_correctors(prior, obs, meas, n_max, false);
    const Index n = prior.grid.size();
    Eigen::VectorXd mu(n);
    for (Index x = 0; x < n; ++x) {
        double v = obs.q(x) * c.l1(x);
        for (size_t k = 0; k < meas.size(); ++k) v += obs.lt(meas[k], x) * c.l1z(x, static_cast<Index>(k));
        mu(x) = v;
    }
    return mu;
}

namespace {

double pair_from_correctors(const Correctors& c, const ObservationModel& obs, const IndexSet& meas, Index x,
                            Index y) {
    double v = obs.q(x) * obs.q(y) * c.l2(x, y);
    for (size_t k = 0; k < meas.size(); ++k)
        v += (obs.q(y) * obs.lt(meas[k], x) + obs.q(x) * obs.lt(meas[k], y)) * c.l2z[k](x, y);
    for (size_t k = 0; k < meas.size(); ++k)
        for (size_t l = 0; l < meas.size(); ++l)
            if (k != l) v += obs.lt(meas[k], x) * obs.lt(meas[l], y) * c.l2zz[k][l](x, y);
    return v;
}

} // namespace

Eigen::MatrixXd posterior_pair_exact(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
                                     int n_max) {
    const Correctors c = compute_correctors(prior, obs, meas, n_max, true);
    const Index n = prior.grid.size();
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
    for (Index x = 0; x < n; ++x)
        for (Index y = x + 1; y < n; ++y) rho(x, y) = rho(y, x) = pair_from_correctors(c, obs, meas, x, y);
    return rho;
}

double posterior_covariance_exact(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
                                  const IndexSet& a, const IndexSet& b, int n_max) {
    const Correctors c = compute_correctors(prior, obs, meas, n_max, true);
    const auto& w = prior.grid.weights;
    const auto in_b = membership(b, prior.grid.size());
    const size_t m = meas.size();
    auto lt = [&](size_t k, Index x) { return obs.lt(meas[k], x); };

    double t1 = 0.0;
    for (int x : a)
        if (in_b[static_cast<size_t>(x)]) t1 += obs.q(x) * c.l1(x) * w(x);

    double t2 = 0.0, t3 = 0.0, t4 = 0.0, t6 = 0.0;
    for (int x : a) {
        for (int y : b) {
            const double ww = w(x) * w(y);
            t2 += obs.q(x) * obs.q(y) * (c.l2(x, y) - c.l1(x) * c.l1(y)) * ww;
            for (size_t k = 0; k < m; ++k) {
                const auto kk = static_cast<Index>(k);
                t3 += obs.q(y) * lt(k, x) * (c.l2z[k](x, y) - c.l1(y) * c.l1z(x, kk)) * ww;
                t4 += obs.q(x) * lt(k, y) * (c.l2z[k](x, y) - c.l1(x) * c.l1z(y, kk)) * ww;
                for (size_t l = 0; l < m; ++l) {
                    if (l == k) continue;
                    t6 += lt(k, x) * lt(l, y) *
                          (c.l2zz[k][l](x, y) - c.l1z(x, kk) * c.l1z(y, static_cast<Index>(l))) * ww;
                }
            }
        }
    }

    double t5 = 0.0;
    for (size_t k = 0; k < m; ++k) {
        const auto kk = static_cast<Index>(k);
        double cap = 0.0, sa = 0.0, sb = 0.0;
        for (int x : a) {
            sa += lt(k, x) * c.l1z(x, kk) * w(x);
            if (in_b[static_cast<size_t>(x)]) cap += lt(k, x) * c.l1z(x, kk) * w(x);
        }
        for (int y : b) sb += lt(k, y) * c.l1z(y, kk) * w(y);
        t5 += cap - sa * sb;
    }
    return t1 + t2 + t3 + t4 + t5 + t6;
}

FiniteProcess posterior_from_joint(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas,
                                   int n_max, JointForm form) {
    const double jxi = measurement_janossy(prior, obs, meas, n_max);
    FiniteProcess post;
    post.grid = prior.grid;
    for (const auto& [c, v] : prior.janossy) {
        if (static_cast<int>(c.size()) > n_max) continue;
        post.janossy[c] = joint_janossy(prior, obs, c, meas, form) / jxi;
    }
    return post;
}

// ---- Enumeration path ----

FiniteProcess enumerate_posterior(const FiniteProcess& prior, const ObservationModel& obs, const IndexSet& meas) {
    if (prior.grid.size() > 6 || meas.size() > 4) throw SizeError("enumeration oracle bound exceeded");
    if (prior.max_size() > 12) throw SizeError("configuration too large for enumeration");
    const size_t m = meas.size();
    const unsigned full = 1u << m;
    std::map<Configuration, double> weight;
    double norm = 0.0;
    for (const auto& [c, v] : prior.janossy) {
        const double pc = prior.probability(c);
        if (pc == 0.0) {
            weight[c] = 0.0;
            continue;
        }
        // dp[mask] = sum over partial associations of processed targets using measurements in mask.
        std::vector<double> dp(full, 0.0), next(full);
        dp[0] = 1.0;
        for (int t : c) {
            std::fill(next.begin(), next.end(), 0.0);
            for (unsigned mask = 0; mask < full; ++mask) {
                if (dp[mask] == 0.0) continue;
                next[mask] += dp[mask] * obs.q(t);
                for (size_t k = 0; k < m; ++k)
                    if (!(mask & (1u << k))) next[mask | (1u << k)] += dp[mask] * obs.lt(meas[k], t);
            }
            dp.swap(next);
        }
        double lik = 0.0;
        for (unsigned mask = 0; mask < full; ++mask) {
            double clutter = 1.0;
            for (size_t k = 0; k < m; ++k)
                if (!(mask & (1u << k))) clutter *= obs.l_c(meas[k]);
            lik += dp[mask] * clutter;
        }
        weight[c] = pc * lik;
        norm += pc * lik;
    }
    if (!(norm > 0.0)) throw DegenerateIntensity("measurement set has zero likelihood");
    for (auto& [c, v] : weight) v /= norm;
    return FiniteProcess::from_probabilities(prior.grid, weight);
}

Eigen::VectorXd process_intensity(const FiniteProcess& p) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p.grid.size());
    for (const auto& [c, v] : p.janossy) {
        const double pc = p.probability(c);
        for (int i : c) mu(i) += pc;
    }
    return mu.cwiseQuotient(p.grid.weights);
}

Eigen::MatrixXd process_pair(const FiniteProcess& p) {
    const Index n = p.grid.size();
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [c, v] : p.janossy) {
        const double pc = p.probability(c);
        Eigen::VectorXd cnt = Eigen::VectorXd::Zero(n);
        for (int i : c) cnt(i) += 1.0;
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y)
                if (x != y) rho(x, y) += pc * cnt(x) * cnt(y);
    }
    const auto& w = p.grid.weights;
    for (Index x = 0; x < n; ++x)
        for (Index y = 0; y < n; ++y) rho(x, y) /= w(x) * w(y);
    return rho;
}

double process_covariance(const FiniteProcess& p, const IndexSet& a, const IndexSet& b) {
    const auto in_a = membership(a, p.grid.size());
    const auto in_b = membership(b, p.grid.size());
    double ea = 0.0, eb = 0.0, eab = 0.0;
    for (const auto& [c, v] : p.janossy) {
        const double pc = p.probability(c);
        double na = 0.0, nb = 0.0;
        for (int i : c) {
            na += in_a[static_cast<size_t>(i)];
            nb += in_b[static_cast<size_t>(i)];
        }
        ea += pc * na;
        eb += pc * nb;
        eab += pc * na * nb;
    }
    return eab - ea * eb;
}

double process_expected_count(const FiniteProcess& p) {
    double e = 0.0;
    for (const auto& [c, v] : p.janossy) e += p.probability(c) * static_cast<double>(c.size());
    return e;
}

// ---- Poisson closed forms ----

namespace {

Eigen::VectorXd poisson_denominators(const GridSpec& g, const Eigen::VectorXd& lambda, const ObservationModel& obs,
                                     const IndexSet& meas) {
    Eigen::VectorXd d(static_cast<Index>(meas.size()));
    for (size_t k = 0; k < meas.size(); ++k) {
        double s = obs.l_c(meas[k]);
        for (Index u = 0; u < g.size(); ++u) s += obs.lt(meas[k], u) * lambda(u) * g.weights(u);
        d(static_cast<Index>(k)) = s;
    }
    return d;
}

} // namespace

double poisson_measurement_janossy(const GridSpec& g, const Eigen::VectorXd& lambda, const ObservationModel& obs,
                                   const IndexSet& meas) {
    double detected = 0.0;
    for (Index u = 0; u < g.size(); ++u) detected += obs.p_d(u) * lambda(u) * g.weights(u);
    return std::exp(-detected) * poisson_denominators(g, lambda, obs, meas).prod();
}

Eigen::VectorXd poisson_posterior_intensity(const GridSpec& g, const Eigen::VectorXd& lambda,
                                            const ObservationModel& obs, const IndexSet& meas) {
    const Eigen::VectorXd d = poisson_denominators(g, lambda, obs, meas);
    Eigen::VectorXd mu(g.size());
    for (Index x = 0; x < g.size(); ++x) {
        double v = obs.q(x);
        for (size_t k = 0; k < meas.size(); ++k) v += obs.lt(meas[k], x) / d(static_cast<Index>(k));
        mu(x) = lambda(x) * v;
    }
    return mu;
}

Eigen::MatrixXd poisson_posterior_pair(const GridSpec& g, const Eigen::VectorXd& lambda, const ObservationModel& obs,
                                       const IndexSet& meas) {
    const Eigen::VectorXd d = poisson_denominators(g, lambda, obs, meas);
    const Index n = g.size();
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
    for (Index x = 0; x < n; ++x) {
        for (Index y = 0; y < n; ++y) {
            if (x == y) continue;
            double v = obs.q(x) * obs.q(y);
            for (size_t k = 0; k < meas.size(); ++k)
                v += (obs.q(y) * obs.lt(meas[k], x) + obs.q(x) * obs.lt(meas[k], y)) / d(static_cast<Index>(k));
            for (size_t r = 0; r < meas.size(); ++r)
                for (size_t p = 0; p < meas.size(); ++p)
                    if (r != p)
                        v += obs.lt(meas[r], x) * obs.lt(meas[p], y) /
                             (d(static_cast<Index>(r)) * d(static_cast<Index>(p)));
            rho(x, y) = lambda(x) * lambda(y) * v;
        }
    }
    return rho;
}

double poisson_posterior_covariance(const GridSpec& g, const Eigen::VectorXd& lambda, const ObservationModel& obs,
                                    const IndexSet& meas, const IndexSet& a, const IndexSet& b) {
    const Eigen::VectorXd d = poisson_denominators(g, lambda, obs, meas);
    const auto in_b = membership(b, g.size());
    const auto& w = g.weights;
    double c = 0.0;
    for (int x : a)
        if (in_b[static_cast<size_t>(x)]) c += obs.q(x) * lambda(x) * w(x);
    for (size_t k = 0; k < meas.size(); ++k) {
        const double dk = d(static_cast<Index>(k));
        double cap = 0.0, sa = 0.0, sb = 0.0;
        for (int x : a) {
            const double v = obs.lt(meas[k], x) * lambda(x) * w(x);
            sa += v;
            if (in_b[static_cast<size_t>(x)]) cap += v;
        }
        for (int y : b) sb += obs.lt(meas[k], y) * lambda(y) * w(y);
        c += cap / dk - sa * sb / (dk * dk);
    }
    return c;
}

// ---- Case files ----

void write_case(std::ostream& os, const OracleCase& c) {
    const auto& g = c.prior.grid;
    os << std::setprecision(17);
    os << "oracle-case 1\n";
    os << "name " << (c.name.empty() ? "unnamed" : c.name) << '\n';
    os << "grid " << g.size() << ' ' << g.points.rows() << '\n';
    for (Index i = 0; i < g.size(); ++i) {
        os << "point";
        for (Index d = 0; d < g.points.rows(); ++d) os << ' ' << g.points(d, i);
        os << '\n';
    }
    os << "weights";
    for (Index i = 0; i < g.size(); ++i) os << ' ' << g.weights(i);
    os << '\n';
    os << "janossy " << c.prior.janossy.size() << '\n';
    for (const auto& [cfg, v] : c.prior.janossy) {
        os << "config " << cfg.size();
        for (int i : cfg) os << ' ' << i;
        os << " = " << v << '\n';
    }
    os << "p_d";
    for (Index i = 0; i < c.obs.p_d.size(); ++i) os << ' ' << c.obs.p_d(i);
    os << '\n';
    os << "l_c";
    for (Index i = 0; i < c.obs.l_c.size(); ++i) os << ' ' << c.obs.l_c(i);
    os << '\n';
    os << "l_d " << c.obs.l_d.rows() << ' ' << c.obs.l_d.cols() << '\n';
    for (Index r = 0; r < c.obs.l_d.rows(); ++r) {
        os << "row";
        for (Index k = 0; k < c.obs.l_d.cols(); ++k) os << ' ' << c.obs.l_d(r, k);
        os << '\n';
    }
    os << "meas " << c.meas.size();
    for (int z : c.meas) os << ' ' << z;
    os << '\n';
    os << "n_max " << c.n_max << '\n';
}

namespace {

std::istringstream expect_line(std::istream& is, const std::string& tag) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string t;
        ls >> t;
        if (t != tag) throw ConfigError("oracle-case", "expected '" + tag + "', found '" + t + "'");
        return ls;
    }
    throw ConfigError("oracle-case", "unexpected end of file before '" + tag + "'");
}

Eigen::VectorXd read_values(std::istringstream& ls) {
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

} // namespace

OracleCase read_case(std::istream& is) {
    OracleCase c;
    int version = 0;
    expect_line(is, "oracle-case") >> version;
    if (version != 1) throw ConfigError("oracle-case", "unsupported version");
    expect_line(is, "name") >> c.name;
    Index n = 0, dim = 0;
    expect_line(is, "grid") >> n >> dim;
    c.prior.grid.points.resize(dim, n);
    for (Index i = 0; i < n; ++i) {
        auto ls = expect_line(is, "point");
        for (Index d = 0; d < dim; ++d) ls >> c.prior.grid.points(d, i);
    }
    {
        auto ls = expect_line(is, "weights");
        c.prior.grid.weights = read_values(ls);
    }
    size_t entries = 0;
    expect_line(is, "janossy") >> entries;
    for (size_t e = 0; e < entries; ++e) {
        auto ls = expect_line(is, "config");
        size_t sz = 0;
        ls >> sz;
        Configuration cfg(sz);
        for (auto& i : cfg) ls >> i;
        std::string eq;
        double v = 0.0;
        ls >> eq >> v;
        c.prior.janossy[cfg] = v;
    }
    {
        auto ls = expect_line(is, "p_d");
        c.obs.p_d = read_values(ls);
    }
    {
        auto ls = expect_line(is, "l_c");
        c.obs.l_c = read_values(ls);
    }
    Index rows = 0, cols = 0;
    expect_line(is, "l_d") >> rows >> cols;
    c.obs.l_d.resize(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        auto ls = expect_line(is, "row");
        for (Index k = 0; k < cols; ++k) ls >> c.obs.l_d(r, k);
    }
    {
        auto ls = expect_line(is, "meas");
        size_t m = 0;
        ls >> m;
        c.meas.resize(m);
        for (auto& z : c.meas) ls >> z;
    }
    expect_line(is, "n_max") >> c.n_max;
    return c;
}

} // namespace dppphd
