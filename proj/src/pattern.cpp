#include <cctype>
#include <cmath>
#include <sstream>

#include "fbm/cascade.hpp"

namespace fbm {

namespace {

void write_groups(std::ostringstream &os, const std::vector<std::vector<int>> &groups, std::size_t depth) {
    if (depth >= groups.size()) return;
    os << '(';
    for (std::size_t k = 0; k < groups[depth].size(); ++k) {
        if (k) os << ',';
        os << groups[depth][k] + 1;
    }
    write_groups(os, groups, depth + 1);
    os << ')';
}

class PatternParser {
  public:
    explicit PatternParser(const std::string &text) : s_(text) {}

    BreakingPattern parse() {
        BreakingPattern p;
        skip_space();
        while (pos_ < s_.size()) {
            FailureCycle c;
            c.phase1 = label();
            if (peek() == '(') groups(c.bursts);
            p.cycles.push_back(std::move(c));
            skip_space();
        }
        if (p.cycles.empty()) fail("empty pattern");
        return p;
    }

  private:
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[noreturn]] void fail(const std::string &what) const {
        throw std::invalid_argument("breaking pattern '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
    }
    int label() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a component label");
        const int v = std::stoi(s_.substr(start, pos_ - start));
        if (v < 1) fail("labels are 1-based");
        return v - 1;
    }
    // '(' label {',' label} [nested] ')'
    void groups(std::vector<std::vector<int>> &out) {
        ++pos_;
        std::vector<int> g;
        g.push_back(label());
        while (peek() == ',') {
            ++pos_;
            g.push_back(label());
        }
        out.push_back(std::move(g));
        if (peek() == '(') groups(out);
        if (peek() != ')') fail("expected ')'");
        ++pos_;
    }

    const std::string &s_;
    std::size_t pos_ = 0;
};

} // namespace

std::string BreakingPattern::to_string() const {
    std::ostringstream os;
    for (std::size_t u = 0; u < cycles.size(); ++u) {
        if (u) os << ' ';
        os << cycles[u].phase1 + 1;
        write_groups(os, cycles[u].bursts, 0);
    }
    return os.str();
}

BreakingPattern BreakingPattern::parse(const std::string &text) { return PatternParser(text).parse(); }

Mask BreakingPattern::components(int n) const {
    Mask seen = 0;
    auto add = [&](int i) {
        if (i < 0 || i >= n) throw std::invalid_argument("breaking pattern names a component outside the bundle");
        const Mask bit = Mask{1} << i;
        if (seen & bit) throw std::invalid_argument("breaking pattern lists a component twice");
        seen |= bit;
    };
    for (const auto &c : cycles) {
        add(c.phase1);
        for (const auto &g : c.bursts) {
            if (g.empty()) throw std::invalid_argument("breaking pattern has an empty burst group");
            for (int i : g) add(i);
        }
    }
    return seen;
}

bool replay_pattern(const BreakingPattern &pattern, std::span<const double> x, const LoadShareRule &rule,
                    const StructureFunction &structure) {
    const int n = rule.size();
    if (structure.size() != n) throw std::invalid_argument("rule and structure disagree on the component count");
    validate_strengths(x, n);
    try {
        pattern.components(n);
    } catch (const std::invalid_argument &) {
        return false;
    }
    if (pattern.cycles.empty()) return false;

    std::vector<double> lam(n), lower(n), upper(n);
    Mask alive = full_mask(n); // N - C_u
    double previous = 0.0;
    for (const auto &cycle : pattern.cycles) {
        if (!structure.works(alive) || !contains(alive, cycle.phase1)) return false;
        rule.evaluate(alive, lam);
        const double s = x[cycle.phase1] / lam[cycle.phase1]; // (C1)
        if (!(s > previous)) return false;
        bool minimal = true;
        for_each_member(alive, [&](int j) { minimal = minimal && x[j] / lam[j] >= s; });
        if (!minimal) return false;

        Mask before = 0;                            // B_{u(m-2)}
        Mask removed = Mask{1} << cycle.phase1;     // B_{u(m-1)}
        for (std::size_t m = 0; m < cycle.bursts.size(); ++m) {
            if (!structure.works(alive & ~removed)) return false;
            rule.evaluate(alive & ~before, lower);
            rule.evaluate(alive & ~removed, upper);
            Mask group = 0;
            for (int i : cycle.bursts[m]) {
                if (!contains(alive & ~removed, i)) return false;
                // A Phase-I tie joins the first group regardless of rounding.
                const bool tie = m == 0 && x[i] / lower[i] == s;
                if (!tie && !(lower[i] * s < x[i] && x[i] <= upper[i] * s)) return false;
                group |= Mask{1} << i;
            }
            before = removed;
            removed |= group;
        }
        const Mask rest = alive & ~removed;
        if (structure.works(rest)) {
            rule.evaluate(rest, lam);
            bool stable = true;
            for_each_member(rest, [&](int j) { stable = stable && x[j] > lam[j] * s; });
            if (!stable) return false;
        }
        alive = rest;
        previous = s;
    }
    return !structure.works(alive);
}

} // namespace fbm
