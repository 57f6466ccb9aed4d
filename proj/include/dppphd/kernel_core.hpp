#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace dppphd {

using Index = Eigen::Index;
using IndexSet = std::vector<int>;

enum class KernelKind { correlation, interaction };

/// Discretization points (one column per point) and their reference-measure masses.
struct GridSpec {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;

    [[nodiscard]] Index size() const { return weights.size(); }

    static GridSpec unit(Index n, Index dim = 1);
};

/// Finite-range predicate. Entry (i,j) is forced to zero when excluded.
struct BandSpec {
    enum class Mode { none, index, spatial };
    Mode mode = Mode::none;

    /// Index mode: (i,j) allowed iff |i-j| <= max(halfwidth[i], halfwidth[j]).
    std::vector<int> halfwidth;
    /// Index mode, optional: pairs from different blocks are excluded.
    std::vector<int> block;

    /// Spatial mode: (i,j) allowed iff ||p_i - p_j|| <= radius.
    double radius = 0.0;

    [[nodiscard]] bool allows(const GridSpec& grid, Index i, Index j) const;

    static BandSpec none_band() { return {}; }
    static BandSpec index_band(Index n, int halfwidth);
    static BandSpec spatial_band(double radius);
};

/// Symmetric kernel on a weighted grid; entries are densities w.r.t. the grid measure.
struct DiscretizedKernel {
    GridSpec grid;
    Eigen::MatrixXd entries;
    KernelKind kind = KernelKind::correlation;
    BandSpec band;

    [[nodiscard]] Index size() const { return entries.rows(); }

    /// W^1/2 K W^1/2, the matrix of the integral operator in an orthonormal basis.
    [[nodiscard]] Eigen::MatrixXd normalized() const;
    void set_from_normalized(const Eigen::MatrixXd& khat);
};

struct MomentPair {
    Eigen::VectorXd intensity;
    Eigen::MatrixXd pair_factorial;
};

struct KernelOptions {
    double delta = 1e-3;
    double warn_threshold = 1e-8;
    int max_alternations = 2;
};

/// Tally of negativity clamps applied to determinant expressions.
struct ClampStats {
    long long evaluated = 0;
    long long clamped = 0;
    long long above_threshold = 0;
    double largest = 0.0;

    void record(double value, double threshold);
    void merge(const ClampStats& o);
};

struct KernelCheck {
    bool symmetric = false;
    bool spectrum_ok = false;
    bool band_ok = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;

    [[nodiscard]] bool ok() const { return symmetric && spectrum_ok && band_ok; }
};

// ---- Kernel algebra ----

/// J = (Id - K)^-1 K through the spectrum of the normalized operator.
[[nodiscard]] DiscretizedKernel interaction_kernel(const DiscretizedKernel& k, const KernelOptions& opt = {});

/// K = (Id + J)^-1 J.
[[nodiscard]] DiscretizedKernel correlation_from_interaction(const DiscretizedKernel& j);

[[nodiscard]] MomentPair determinantal_moments(const DiscretizedKernel& k, ClampStats* stats = nullptr,
                                               const KernelOptions& opt = {});

/// int_{A cap B} K(x,x) - int_{A x B} K(x,y)^2, discretized with grid weights.
[[nodiscard]] double cross_covariance(const DiscretizedKernel& k, const IndexSet& a, const IndexSet& b);

/// Probability of the exact configuration `subset` on the grid.
[[nodiscard]] double janossy_density_dpp(const DiscretizedKernel& k, const IndexSet& subset,
                                         const KernelOptions& opt = {});

/// Projection onto the feasible set of the kernel kind, band included.
[[nodiscard]] DiscretizedKernel project_kernel(DiscretizedKernel k, const KernelOptions& opt = {});

/// Unit-weight, unbanded convenience overload.
[[nodiscard]] DiscretizedKernel project_kernel(const Eigen::MatrixXd& m, KernelKind kind,
                                               const KernelOptions& opt = {});

void apply_band(DiscretizedKernel& k);

[[nodiscard]] KernelCheck check_kernel(const DiscretizedKernel& k, const KernelOptions& opt = {},
                                       double tol = 1e-9);

/// Weighted trace.
[[nodiscard]] double kernel_mass(const DiscretizedKernel& k);

/// Dense row-major CSV, 17 significant digits.
void write_kernel_csv(std::ostream& os, const DiscretizedKernel& k);

} // namespace dppphd
