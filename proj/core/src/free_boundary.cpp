#include "helfb/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace helfb {

namespace {

// Lattice-edge keys: horizontal edge (i,j)-(i+1,j) and vertical (i,j)-(i,j+1).
std::int64_t h_edge_key(const CrossSectionGrid& g, int i, int j) {
    return 2 * static_cast<std::int64_t>(g.node_index(i, j));
}
std::int64_t v_edge_key(const CrossSectionGrid& g, int i, int j) {
    return 2 * static_cast<std::int64_t>(g.node_index(i, j)) + 1;
}

}  // namespace

std::vector<FreeBoundaryCurve> extract_free_boundary(const StreamField& psi, double theta) {
    const CrossSectionGrid& g = psi.grid();
    const std::vector<double>& v = psi.values();

    struct Segment {
        int from = -1, to = -1;
    };
    std::unordered_map<std::int64_t, int> vertex_of_edge;
    std::vector<Vec2> positions;
    std::vector<Segment> segments;

    // Canonical crossing position along the edge between two node indices.
    auto vertex_id = [&](std::int64_t key, int i0, int j0, int i1, int j1) {
        auto it = vertex_of_edge.find(key);
        if (it != vertex_of_edge.end()) return it->second;
        const double va = v[g.node_index(i0, j0)];
        const double vb = v[g.node_index(i1, j1)];
        const double t = (theta - va) / (vb - va);
        const Vec2 pa = g.node_pos(i0, j0);
        const Vec2 pb = g.node_pos(i1, j1);
        const int id = static_cast<int>(positions.size());
        positions.push_back(pa + t * (pb - pa));
        vertex_of_edge.emplace(key, id);
        return id;
    };

    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            if (!g.cell_active[g.cell_index(ci, cj)]) continue;
            // Corners counterclockwise: SW, SE, NE, NW.
            const int cni[4] = {ci, ci + 1, ci + 1, ci};
            const int cnj[4] = {cj, cj, cj + 1, cj + 1};
            double val[4];
            bool pos[4];
            for (int a = 0; a < 4; ++a) {
                val[a] = v[g.node_index(cni[a], cnj[a])];
                pos[a] = val[a] > theta;
            }
            if (pos[0] == pos[1] && pos[1] == pos[2] && pos[2] == pos[3]) continue;

            // CCW edges: bottom, right, top, left; canonical node order for
            // crossing interpolation is the lower node index first.
            std::int64_t keys[4] = {h_edge_key(g, ci, cj), v_edge_key(g, ci + 1, cj),
                                    h_edge_key(g, ci, cj + 1), v_edge_key(g, ci, cj)};
            auto edge_vertex = [&](int e) {
                switch (e) {
                    case 0: return vertex_id(keys[0], ci, cj, ci + 1, cj);
                    case 1: return vertex_id(keys[1], ci + 1, cj, ci + 1, cj + 1);
                    case 2: return vertex_id(keys[2], ci, cj + 1, ci + 1, cj + 1);
                    default: return vertex_id(keys[3], ci, cj, ci, cj + 1);
                }
            };

            bool falling[4], rising[4];
            for (int e = 0; e < 4; ++e) {
                const int a = e, b = (e + 1) % 4;
                falling[e] = pos[a] && !pos[b];
                rising[e] = !pos[a] && pos[b];
            }
            const bool center_positive = 0.25 * (val[0] + val[1] + val[2] + val[3]) > theta;
            for (int e = 0; e < 4; ++e) {
                if (!falling[e]) continue;
                int target = -1;
                for (int step = 1; step < 4 && target < 0; ++step) {
                    const int cand = center_positive ? (e + step) % 4 : (e + 4 - step) % 4;
                    if (rising[cand]) target = cand;
                }
                segments.push_back({edge_vertex(e), edge_vertex(target)});
            }
        }
    }

    // Each crossing has at most one incoming and one outgoing segment.
    std::vector<int> out_seg(positions.size(), -1);
    std::vector<int> in_count(positions.size(), 0);
    for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
        out_seg[segments[s].from] = s;
        ++in_count[segments[s].to];
    }

    std::vector<FreeBoundaryCurve> curves;
    std::vector<bool> used(segments.size(), false);
    auto walk = [&](int first_seg, bool closed_hint) {
        FreeBoundaryCurve curve;
        int s = first_seg;
        curve.vertices.push_back(positions[segments[s].from]);
        while (s >= 0 && !used[s]) {
            used[s] = true;
            curve.vertices.push_back(positions[segments[s].to]);
            const int next = out_seg[segments[s].to];
            if (next == first_seg) {
                curve.closed = true;
                curve.vertices.pop_back();  // do not repeat the start vertex
                break;
            }
            s = next;
        }
        (void)closed_hint;
        curves.push_back(std::move(curve));
    };

    // Open chains start at crossings with no incoming segment.
    for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
        if (!used[s] && in_count[segments[s].from] == 0) walk(s, false);
    }
    // Remaining segments belong to closed loops.
    for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
        if (!used[s]) walk(s, true);
    }
    return curves;
}

FbConditionStats fb_condition_residual(const StreamField& psi, FreeBoundaryCurve& curve,
                                       const Pitch& pitch, double lambda,
                                       double solid_level) {
    const CrossSectionGrid& g = psi.grid();
    if (solid_level < 0.0) solid_level = 2.0 * g.h * lambda;
    constexpr int kSearchRadius = 8;

    FbConditionStats stats;
    curve.residuals.assign(curve.vertices.size(), std::nan(""));
    double sum = 0.0, sq = 0.0;

    auto cell_solid = [&](int ci, int cj) {
        if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) return false;
        if (!g.cell_active[g.cell_index(ci, cj)]) return false;
        return psi.values()[g.node_index(ci, cj)] > solid_level &&
               psi.values()[g.node_index(ci + 1, cj)] > solid_level &&
               psi.values()[g.node_index(ci, cj + 1)] > solid_level &&
               psi.values()[g.node_index(ci + 1, cj + 1)] > solid_level;
    };

    for (std::size_t k = 0; k < curve.vertices.size(); ++k) {
        const Vec2& p = curve.vertices[k];
        const int ci0 = static_cast<int>(std::floor((p.x - g.origin.x) / g.h));
        const int cj0 = static_cast<int>(std::floor((p.y - g.origin.y) / g.h));
        int best_ci = -1, best_cj = -1;
        double best_d2 = 0.0;
        for (int dj = -kSearchRadius; dj <= kSearchRadius; ++dj) {
            for (int di = -kSearchRadius; di <= kSearchRadius; ++di) {
                const int ci = ci0 + di, cj = cj0 + dj;
                if (!cell_solid(ci, cj)) continue;
                const Vec2 c = g.cell_center(ci, cj);
                const double d2 = (c - p).norm2();
                if (best_ci < 0 || d2 < best_d2) {
                    best_ci = ci;
                    best_cj = cj;
                    best_d2 = d2;
                }
            }
        }
        if (best_ci < 0) {
            ++stats.skipped;
            continue;
        }
        const Vec2 grad = psi.cell_gradient(best_ci, best_cj);
        const double r = coeff_matrix(p, pitch).quad(grad) - lambda * lambda;
        curve.residuals[k] = r;
        stats.max_abs = std::max(stats.max_abs, std::abs(r));
        sum += r;
        sq += r * r;
        ++stats.sampled;
    }
    if (stats.sampled > 0) {
        stats.mean = sum / stats.sampled;
        stats.rms = std::sqrt(sq / stats.sampled);
    }
    return stats;
}

FbConditionStats fb_condition_residual_at_vertices(const PlanarScalarField& psi,
                                                   FreeBoundaryCurve& curve,
                                                   const Pitch& pitch, double lambda) {
    FbConditionStats stats;
    curve.residuals.assign(curve.vertices.size(), std::nan(""));
    double sum = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < curve.vertices.size(); ++k) {
        const Vec2& p = curve.vertices[k];
        const auto grad = psi.gradient(p);
        if (!grad) {
            ++stats.skipped;
            continue;
        }
        const double r = coeff_matrix(p, pitch).quad(*grad) - lambda * lambda;
        curve.residuals[k] = r;
        stats.max_abs = std::max(stats.max_abs, std::abs(r));
        sum += r;
        sq += r * r;
        ++stats.sampled;
    }
    if (stats.sampled > 0) {
        stats.mean = sum / stats.sampled;
        stats.rms = std::sqrt(sq / stats.sampled);
    }
    return stats;
}

}  // namespace helfb
