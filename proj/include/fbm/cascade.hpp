#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbm/distribution.hpp"
#include "fbm/loadshare.hpp"
#include "fbm/parallel.hpp"
#include "fbm/subset.hpp"

namespace fbm {

/// Coherent system structure over the bundle's components.
///  - parallel: works while any component works (smallest cut = n).
///  - column_paths: works while some column of the rows x cols grid is
///    fully intact; minimal cuts take one node per column (size cols).
class StructureFunction {
  public:
    enum class Kind { parallel, column_paths };

    static StructureFunction parallel(int n);
    static StructureFunction column_paths(int rows, int cols);
    static StructureFunction parse(const std::string &name, int rows, int cols);

    Kind kind() const { return kind_; }
    int size() const { return n_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    bool works(Mask alive) const {
        if (kind_ == Kind::parallel) return alive != 0;
        for (Mask p : paths_)
            if ((alive & p) == p) return true;
        return false;
    }

    std::vector<Mask> minimal_path_sets() const;
    int smallest_cut_size() const { return kind_ == Kind::parallel ? n_ : cols_; }
    std::string name() const { return kind_ == Kind::parallel ? "parallel" : "column-paths"; }

  private:
    StructureFunction(Kind k, int n, int rows, int cols);

    Kind kind_;
    int n_;
    int rows_;
    int cols_;
    std::vector<Mask> paths_;
};

/// One Phase I/II cycle: the Phase-I failure followed by the nested burst
/// groups it triggers, each group caused by the load shed by the previous one.
struct FailureCycle {
    int phase1 = -1;
    std::vector<std::vector<int>> bursts;

    bool operator==(const FailureCycle &) const = default;
};

/// Breaking pattern p_1 p_2 ... p_f. Text form uses 1-based labels, cycles
/// separated by spaces and groups nested in parentheses: "1(2,3(4)) 5".
struct BreakingPattern {
    std::vector<FailureCycle> cycles;

    std::string to_string() const;
    static BreakingPattern parse(const std::string &text);
    /// Mask of every component named in the pattern; throws on duplicates
    /// or labels outside [0, n).
    Mask components(int n) const;

    bool operator==(const BreakingPattern &) const = default;
};

struct CascadeResult {
    double strength = 0.0;                 // S*
    std::vector<double> phase1_stresses;   // S_1 < S_2 < ... (one per cycle)
    BreakingPattern pattern;
    std::vector<Mask> survivor_sets;       // P_0 = N, then the survivors after each cycle
};

/// Thrown when a rule lowers some survivor's multiplier as components fail.
struct NonMonotoneRuleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void validate_strengths(std::span<const double> x, int n);

/// Runs the loaded bundle to system failure. Phase I: the survivor with the
/// smallest x_i / lambda_i(P) fails at s = that ratio (ties: lowest index
/// fails, the rest join the first burst). Phase II: every survivor with
/// x_i <= lambda_i(P') s fails as one group, repeated until no survivor is
/// over-stressed. Stops after the group that leaves no intact path set.
CascadeResult simulate_cascade(std::span<const double> x, const LoadShareRule &rule,
                               const StructureFunction &structure);

/// Strength only; same process as simulate_cascade without the record.
double bundle_strength(std::span<const double> x, const LoadShareRule &rule, const StructureFunction &structure);

/// Checks a pattern against strengths x through the cycle equations and
/// bracketing inequalities: the Phase-I stress of cycle u is
/// x_{i_u} / lambda_{i_u}(N - C_u); each member of group m of cycle u obeys
/// lambda(N - C_u - B_{m-2}) s_u < x <= lambda(N - C_u - B_{m-1}) s_u.
/// Also requires increasing stresses, no over-stressed survivor at the end
/// of a cycle, and system failure exactly at the final cycle.
bool replay_pattern(const BreakingPattern &pattern, std::span<const double> x, const LoadShareRule &rule,
                    const StructureFunction &structure);

inline constexpr std::uint64_t kReplicaBlock = 4096;

/// Independent bundle strengths, replica r drawn from the stream of block
/// r / kReplicaBlock. Output is identical for any worker count.
std::vector<double> sample_bundle_strengths(const StrengthDistribution &dist, const LoadShareRule &rule,
                                            const StructureFunction &structure, std::uint64_t replicas,
                                            std::uint64_t seed, unsigned workers = default_workers());

struct ChainSpec {
    int m = 1;
};

/// Chain-of-bundles strengths: each draw is the minimum of m bundle
/// strengths picked independently (with replacement) from the pool.
std::vector<double> chain_strength(std::span<const double> bundle_samples, ChainSpec chain, std::uint64_t draws,
                                   std::uint64_t seed);

/// First load cycle (1-based) in which the bundle fails when every cycle
/// ramps the load to s_star and each completed cycle multiplies every
/// strength by a. Requires 0 < a < 1.
std::uint64_t cycles_to_failure(std::span<const double> x, const LoadShareRule &rule,
                                const StructureFunction &structure, double s_star, double a);

/// Same, also accepting a = 1, where the result is 1 or never (nullopt).
std::optional<std::uint64_t> cycles_to_failure_unchecked(std::span<const double> x, const LoadShareRule &rule,
                                                         const StructureFunction &structure, double s_star,
                                                         double a);

} // namespace fbm
