#pragma once

// Binary trees of sorter stages; stages compose on power fractions.

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "interferometer.hpp"

namespace gouy {

// Ideal stage with perfectly matched q.
struct AnalyticStage {
    double delta_gouy;
    double ref_phase;
};

using SorterStage = std::variant<AnalyticStage, InterferometerConfig>;

// refPhase putting `target` at theta = 0 (port 1) for a stage with the given dphi.
inline double solve_stage_offset(double delta_gouy, const LGMode& target) {
    return wrap_two_pi(-target.order() * delta_gouy);
}

inline PortSplit stage_split(const SorterStage& stage, const LGMode& mode) {
    if (const auto* a = std::get_if<AnalyticStage>(&stage)) return analytic_port_split(a->delta_gouy, a->ref_phase, mode);
    const auto res = simulate_port_fields(std::get<InterferometerConfig>(stage), mode);
    const double total = res.i1 + res.i2;
    return {res.i1 / total, res.i2 / total};
}

// Immutable tree node: either a leaf (output channel) or a stage with two children.
class CascadeNode {
public:
    static CascadeNode leaf() { return CascadeNode{}; }

    static CascadeNode split(SorterStage stage, CascadeNode port1, CascadeNode port2) {
        CascadeNode n;
        n.stage_ = std::make_shared<const SorterStage>(std::move(stage));
        n.port1_ = std::make_shared<const CascadeNode>(std::move(port1));
        n.port2_ = std::make_shared<const CascadeNode>(std::move(port2));
        return n;
    }

    bool is_leaf() const { return !stage_; }
    const SorterStage& stage() const { return *stage_; }
    const CascadeNode& port1() const { return *port1_; }
    const CascadeNode& port2() const { return *port2_; }

    int leaf_count() const { return is_leaf() ? 1 : port1_->leaf_count() + port2_->leaf_count(); }
    int depth() const { return is_leaf() ? 0 : 1 + std::max(port1_->depth(), port2_->depth()); }

    // Port labels exchanged at every node: port1() now holds what leaves the
    // stage's second output. Routing is unchanged up to channel numbering.
    bool ports_exchanged() const { return exchanged_; }

    CascadeNode mirrored() const {
        if (is_leaf()) return leaf();
        CascadeNode n = split(*stage_, port2_->mirrored(), port1_->mirrored());
        n.exchanged_ = !exchanged_;
        return n;
    }

private:
    std::shared_ptr<const SorterStage> stage_;
    std::shared_ptr<const CascadeNode> port1_, port2_;
    bool exchanged_ = false;
};

struct ChannelFraction {
    int channel;  // 1-based, leaves numbered depth-first with port 1 first
    double fraction;
};

namespace detail {

inline void route_into(const CascadeNode& node, const LGMode& mode, double weight, int& next_channel,
                       std::vector<ChannelFraction>& out) {
    if (node.is_leaf()) {
        out.push_back({next_channel++, weight});
        return;
    }
    PortSplit s = stage_split(node.stage(), mode);
    if (node.ports_exchanged()) std::swap(s.f1, s.f2);
    route_into(node.port1(), mode, weight * s.f1, next_channel, out);
    route_into(node.port2(), mode, weight * s.f2, next_channel, out);
}

}  // namespace detail

inline std::vector<ChannelFraction> route(const CascadeNode& tree, const LGMode& mode) {
    std::vector<ChannelFraction> out;
    int next = 1;
    detail::route_into(tree, mode, 1.0, next, out);
    return out;
}

struct RoutingMatrix {
    std::vector<LGMode> modes;  // rows
    int channels = 0;           // columns
    std::vector<double> fractions;

    double at(std::size_t row, int channel) const {
        return fractions[row * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel - 1)];
    }
    std::size_t rows() const { return modes.size(); }
};

inline RoutingMatrix routing_matrix(const CascadeNode& tree, std::span<const LGMode> modes) {
    RoutingMatrix m{std::vector<LGMode>(modes.begin(), modes.end()), tree.leaf_count(), {}};
    m.fractions.reserve(modes.size() * static_cast<std::size_t>(m.channels));
    for (const auto& mode : modes)
        for (const auto& cf : route(tree, mode)) m.fractions.push_back(cf.fraction);
    return m;
}

namespace detail {

inline CascadeNode radial_subtree(int level, int levels, int residue, int ell) {
    if (level == levels) return CascadeNode::leaf();
    const double dg = -pi / std::pow(2.0, level + 1);
    const int stride = 1 << level;
    const AnalyticStage stage{dg, solve_stage_offset(dg, LGMode{residue, ell})};
    return CascadeNode::split(stage, radial_subtree(level + 1, levels, residue, ell),
                              radial_subtree(level + 1, levels, residue + stride, ell));
}

}  // namespace detail

// Ideal tree sorting LG(p, ell) for p = 0 .. 2^levels - 1 into distinct channels.
// Stage k deep uses dphi = -pi/2^(k+1); modes reaching it share p mod 2^k and
// the offset puts the lowest such p into port 1.
inline CascadeNode radial_sorter_tree(int levels, int ell = 0) {
    if (levels < 0 || levels > 16) throw invalid_input("radial_sorter_tree: levels out of range");
    return detail::radial_subtree(0, levels, 0, ell);
}

}  // namespace gouy
