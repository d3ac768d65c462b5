#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbm/subset.hpp"

namespace fbm {

/// Thrown when a linear solve that must succeed on a connected graph does
/// not (a failed pocket with no route to a working component).
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Grid of ineffective-length fiber segments. Row r indexes the segment
/// along each fiber, column c the fiber; node (r, c) has index r * cols + c.
/// Nodes are adjacent horizontally and diagonally, never vertically.
struct ComponentGraph {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<int>> adjacency;

    int size() const { return static_cast<int>(adjacency.size()); }
    int node(int r, int c) const { return r * cols + c; }
    int degree(int i) const { return static_cast<int>(adjacency.at(i).size()); }
    bool adjacent(int i, int j) const;
};

ComponentGraph build_grid_graph(int rows, int cols);

/// Complete graph on n nodes (rows = 1, cols = n). Used as the graph whose
/// absorbing rule reproduces equal load sharing.
ComponentGraph build_complete_graph(int n);

/// Row-stochastic one-step matrix of the random walk on a graph.
struct TransitionMatrix {
    Eigen::MatrixXd p;

    int size() const { return static_cast<int>(p.rows()); }
};

TransitionMatrix transition_matrix(const ComponentGraph &g);

/// Absorption probabilities {u_ij : i failed, j working} of the walk that
/// stops on the working set. Rows follow `failed`, columns follow `working`,
/// both ascending.
struct AbsorptionProbabilities {
    std::vector<int> failed;
    std::vector<int> working;
    Eigen::MatrixXd u;
};

inline constexpr double kMinReciprocalCondition = 1e-12;

/// Solves U = Q U + R for the partition (failed, working) of a transition
/// matrix, i.e. U = (I - Q)^{-1} R, by dense LU. Throws ConsistencyError if
/// (I - Q) is numerically singular.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
absorption_matrix(const Eigen::MatrixBase<Derived> &p, const std::vector<int> &failed,
                  const std::vector<int> &working) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto nf = static_cast<Eigen::Index>(failed.size());
    const auto nw = static_cast<Eigen::Index>(working.size());
    if (nf == 0) return Matrix(0, nw);
    Matrix system = Matrix::Identity(nf, nf) - p(failed, failed);
    Matrix r = p(failed, working);
    Eigen::PartialPivLU<Matrix> lu(system);
    if (!(lu.rcond() >= Scalar(kMinReciprocalCondition)))
        throw ConsistencyError("absorption system is singular: a failed component has no path to the working set");
    return lu.solve(r);
}

AbsorptionProbabilities absorption_probabilities(const TransitionMatrix &p, const Configuration &a);

/// Load multipliers lambda_i(A), defined only for survivors i in A.
class LoadShareVector {
  public:
    LoadShareVector(Configuration config, Eigen::VectorXd values);

    const Configuration &configuration() const { return config_; }
    /// Throws std::out_of_range for a failed component.
    double at(int i) const;
    double total() const;
    /// Dense view; entries of failed components are NaN.
    const Eigen::VectorXd &dense() const { return values_; }

  private:
    Configuration config_;
    Eigen::VectorXd values_;
};

LoadShareVector absorbing_load_share(const TransitionMatrix &p, const Configuration &a);
LoadShareVector equal_load_share(int n, const Configuration &a);

/// A load-sharing rule {lambda_i(M)}. Implementations write lambda_i(M) for
/// every i in M into a length-n buffer and leave other entries alone.
class LoadShareRule {
  public:
    virtual ~LoadShareRule() = default;

    virtual int size() const = 0;
    virtual std::string name() const = 0;
    virtual void evaluate(Mask working, std::span<double> lambda) const = 0;

    /// Multipliers for `working`, either in `scratch` or in storage owned by
    /// the rule. The returned view stays valid while the rule is alive and
    /// scratch is not reused.
    virtual std::span<const double> shares(Mask working, std::span<double> scratch) const {
        evaluate(working, scratch);
        return scratch;
    }

    LoadShareVector operator()(const Configuration &a) const;
};

class EqualLoadShare final : public LoadShareRule {
  public:
    explicit EqualLoadShare(int n);
    int size() const override { return n_; }
    std::string name() const override { return "equal"; }
    void evaluate(Mask working, std::span<double> lambda) const override;

  private:
    int n_;
};

/// lambda == 1: no load transfer, components fail independently.
class IndependentLoadShare final : public LoadShareRule {
  public:
    explicit IndependentLoadShare(int n);
    int size() const override { return n_; }
    std::string name() const override { return "independent"; }
    void evaluate(Mask working, std::span<double> lambda) const override;

  private:
    int n_;
};

/// lambda_j(A) = 1 + sum over failed i of the absorption probability i -> j.
/// With memoization enabled, solved configurations are cached in a map
/// shared by copies of the rule; concurrent inserts keep the first writer.
class AbsorbingLoadShare final : public LoadShareRule {
  public:
    explicit AbsorbingLoadShare(TransitionMatrix p, bool memoize = true);
    ~AbsorbingLoadShare() override;

    int size() const override { return p_.size(); }
    std::string name() const override { return "absorbing"; }
    void evaluate(Mask working, std::span<double> lambda) const override;
    const TransitionMatrix &transitions() const { return p_; }
    std::size_t cached() const;

  private:
    struct Cache;
    void solve(Mask working, std::span<double> lambda) const;

    TransitionMatrix p_;
    std::shared_ptr<Cache> cache_;
};

/// Rule backed by an arbitrary callable; used for test rules and transforms.
class FunctionLoadShare final : public LoadShareRule {
  public:
    using Fn = std::function<void(Mask, std::span<double>)>;
    FunctionLoadShare(int n, Fn fn, std::string name = "function");
    int size() const override { return n_; }
    std::string name() const override { return name_; }
    void evaluate(Mask working, std::span<double> lambda) const override { fn_(working, lambda); }

  private:
    int n_;
    Fn fn_;
    std::string name_;
};

/// {(lambda_i(M) / sigma_i)^rho}: the rule under which unit-exponential
/// strengths reproduce Weibull(rho, sigma_i) strengths after x -> x^{1/rho}.
class PoweredLoadShare final : public LoadShareRule {
  public:
    PoweredLoadShare(std::shared_ptr<const LoadShareRule> base, double shape, std::vector<double> scales);
    int size() const override { return base_->size(); }
    std::string name() const override { return "powered-" + base_->name(); }
    void evaluate(Mask working, std::span<double> lambda) const override;

  private:
    std::shared_ptr<const LoadShareRule> base_;
    double shape_;
    std::vector<double> scales_;
};

/// Every configuration of a rule evaluated once, stored as a dense
/// 2^n x n table. Limited to n <= kMaxTabulated.
class LoadShareTable final : public LoadShareRule {
  public:
    static constexpr int kMaxTabulated = 20;

    static LoadShareTable tabulate(const LoadShareRule &rule, unsigned workers = 1);

    int size() const override { return n_; }
    std::string name() const override { return name_; }
    void evaluate(Mask working, std::span<double> lambda) const override;
    std::span<const double> shares(Mask working, std::span<double>) const override { return row(working); }

    std::span<const double> row(Mask working) const {
        return {data_.data() + static_cast<std::size_t>(working) * n_, static_cast<std::size_t>(n_)};
    }

  private:
    LoadShareTable(int n, std::string name) : n_(n), name_(std::move(name)) {}

    int n_;
    std::string name_;
    std::vector<double> data_;
};

std::unique_ptr<LoadShareRule> make_rule(const std::string &name, const ComponentGraph &g, bool memoize = true);

struct MonotoneViolation {
    Mask smaller = 0; // A
    Mask larger = 0;  // B, with A a proper subset of B
    int component = -1; // j in A with lambda_j(B) > lambda_j(A); -1 flags a non-positive total on `larger`
};

struct MonotoneReport {
    bool monotone = true;
    bool exhaustive = false;
    std::uint64_t pairs_checked = 0;
    std::optional<MonotoneViolation> counterexample;
};

/// Checks lambda_j(B) <= lambda_j(A) for A a proper subset of B, j in A, and
/// a positive total on every nonempty configuration. Exhaustive over all
/// pairs for n <= 12; otherwise `sample_budget` random pairs.
MonotoneReport verify_monotone(const LoadShareRule &rule, std::uint64_t sample_budget = 100000,
                               std::uint64_t seed = 1, double tolerance = 1e-12);

} // namespace fbm
