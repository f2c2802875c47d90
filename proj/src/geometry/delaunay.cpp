#include "delaunay.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "bowtie/errors.hpp"
#include "predicates.hpp"

namespace bowtie::detail {

namespace {

struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> n{-1, -1, -1};  // n[i] lies across the edge opposite v[i]
    bool alive = true;
};

std::uint64_t hilbert_key(std::uint32_t x, std::uint32_t y, int order) {
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << (order - 1); s > 0; s >>= 1) {
        const std::uint32_t rx = (x & s) ? 1u : 0u;
        const std::uint32_t ry = (y & s) ? 1u : 0u;
        d += static_cast<std::uint64_t>(s) * s * ((3u * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - (x & (s - 1)) + (x & ~(s - 1));
                y = s - 1 - (y & (s - 1)) + (y & ~(s - 1));
                x &= (s << 1) - 1;
                y &= (s << 1) - 1;
            }
            std::swap(x, y);
        }
    }
    return d;
}

class Triangulator {
public:
    explicit Triangulator(std::span<const Point2> pts) : n_input_(static_cast<int>(pts.size())) {
        pts_.assign(pts.begin(), pts.end());
        double xmin = pts_[0].x, xmax = xmin, ymin = pts_[0].y, ymax = ymin;
        for (const auto& p : pts_) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
        const double ext = std::max({xmax - xmin, ymax - ymin, 1e-300});
        const double big = 1e4 * ext;
        pts_.push_back({cx - big, cy - big});
        pts_.push_back({cx + big, cy - big});
        pts_.push_back({cx, cy + big});
        tris_.push_back(Tri{{n_input_, n_input_ + 1, n_input_ + 2}});
        bbox_ = {xmin, ymin, ext};
        fan_.assign(pts_.size(), -1);
        stamp_.reserve(2 * pts.size() + 8);
    }

    void run() {
        std::vector<int> order(static_cast<std::size_t>(n_input_));
        std::iota(order.begin(), order.end(), 0);
        constexpr int kOrder = 16;
        const double scale = ((1u << kOrder) - 1) / bbox_[2];
        std::vector<std::uint64_t> key(order.size());
        for (int i = 0; i < n_input_; ++i) {
            const auto qx = static_cast<std::uint32_t>((pts_[i].x - bbox_[0]) * scale);
            const auto qy = static_cast<std::uint32_t>((pts_[i].y - bbox_[1]) * scale);
            key[i] = hilbert_key(qx, qy, kOrder);
        }
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return key[a] != key[b] ? key[a] < key[b] : a < b;
        });
        for (int idx : order) insert(idx);
    }

    std::vector<std::array<int, 3>> result() const {
        std::vector<std::array<int, 3>> out;
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= n_input_ || t.v[1] >= n_input_ || t.v[2] >= n_input_) continue;
            out.push_back(t.v);
        }
        return out;
    }

private:
    int locate(Point2 p) {
        int t = last_;
        int rot = 0;
        for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
            const Tri& tri = tris_[t];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const int i = (k + rot) % 3;
                const int a = tri.v[(i + 1) % 3], b = tri.v[(i + 2) % 3];
                if (orient2d(pts_[a], pts_[b], p) < 0) {
                    next = tri.n[i];
                    break;
                }
            }
            if (next < 0) return t;
            t = next;
            rot = (rot + 1) % 3;
        }
        throw NumericalError("delaunay: point location did not terminate");
    }

    bool in_circle(int t, Point2 p) const {
        const Tri& tri = tris_[t];
        return incircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], p) > 0;
    }

    int new_tri(const std::array<int, 3>& v) {
        if (!free_.empty()) {
            const int id = free_.back();
            free_.pop_back();
            tris_[id] = Tri{v};
            return id;
        }
        tris_.push_back(Tri{v});
        return static_cast<int>(tris_.size()) - 1;
    }

    void insert(int pi) {
        const Point2 p = pts_[pi];
        const int t0 = locate(p);

        ++epoch_;
        mark(t0);
        cavity_.clear();
        cavity_.push_back(t0);
        for (std::size_t c = 0; c < cavity_.size(); ++c) {
            const Tri& tri = tris_[cavity_[c]];
            for (int i = 0; i < 3; ++i) {
                const int nb = tri.n[i];
                if (nb < 0 || marked(nb)) continue;
                if (in_circle(nb, p)) {
                    mark(nb);
                    cavity_.push_back(nb);
                }
            }
        }

        rim_.clear();
        for (int t : cavity_) {
            const Tri& tri = tris_[t];
            for (int i = 0; i < 3; ++i) {
                const int nb = tri.n[i];
                if (nb >= 0 && marked(nb)) continue;
                rim_.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb});
            }
        }
        // Cavity slots are recycled first; outside neighbours are relinked below.
        std::vector<int> dead_ids = cavity_;
        created_.clear();
        for (const auto& r : rim_) {
            if (orient2d(pts_[r.a], pts_[r.b], p) <= 0)
                throw NumericalError("delaunay: cavity is not star-shaped");
            int id;
            if (!dead_ids.empty()) {
                id = dead_ids.back();
                dead_ids.pop_back();
                tris_[id] = Tri{{r.a, r.b, pi}};
            } else {
                id = new_tri({r.a, r.b, pi});
            }
            tris_[id].n[2] = r.outside;
            if (r.outside >= 0) {
                Tri& o = tris_[r.outside];
                for (int j = 0; j < 3; ++j) {
                    const int oa = o.v[(j + 1) % 3], ob = o.v[(j + 2) % 3];
                    if (oa == r.b && ob == r.a) {
                        o.n[j] = id;
                        break;
                    }
                }
            }
            fan_[r.a] = id;
            created_.push_back(id);
        }
        for (int id : dead_ids) {
            tris_[id].alive = false;
            free_.push_back(id);
        }
        for (int id : created_) {
            Tri& t = tris_[id];
            // edge opposite a is (b, p): shared with the new triangle starting at b
            t.n[0] = fan_[t.v[1]];
            // edge opposite b is (p, a): shared with the new triangle ending at a
            t.n[1] = -1;
        }
        for (int id : created_) {
            const int nb = tris_[id].n[0];
            tris_[nb].n[1] = id;
        }
        for (int id : created_) fan_[tris_[id].v[0]] = -1;
        last_ = created_.front();
    }

    void mark(int t) {
        if (stamp_.size() < tris_.size()) stamp_.resize(tris_.size() * 2, 0);
        stamp_[t] = epoch_;
    }
    bool marked(int t) const { return t < static_cast<int>(stamp_.size()) && stamp_[t] == epoch_; }

    int n_input_;
    std::vector<Point2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    std::vector<int> fan_;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t epoch_ = 0;
    std::vector<int> cavity_;
    struct RimEdge {
        int a, b, outside;
    };
    std::vector<RimEdge> rim_;
    std::vector<int> created_;
    int last_ = 0;
    std::array<double, 3> bbox_{};
};

}  // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(std::span<const Point2> points) {
    if (points.size() < 3) throw std::invalid_argument("delaunay: need at least three points");
    {
        std::vector<Point2> sorted(points.begin(), points.end());
        std::sort(sorted.begin(), sorted.end(),
                  [](Point2 a, Point2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("delaunay: duplicate points");
    }
    Triangulator tr(points);
    tr.run();
    return tr.result();
}

}  // namespace bowtie::detail
