#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <queue>
#include <vector>

namespace cylfit {

// Small exact kd-tree over D-dimensional points (D = 2 or 3 here).  Median
// split on the widest axis, leaf buckets of 16.  Queries are exact; ties in
// distance are broken by index so results are deterministic.
template <int D>
class KdTree {
public:
    using Point = Eigen::Matrix<double, D, 1>;

    KdTree() = default;

    explicit KdTree(std::vector<Point> pts) : pts_(std::move(pts)) {
        order_.resize(pts_.size());
        std::iota(order_.begin(), order_.end(), 0);
        if (!pts_.empty()) root_ = build(0, pts_.size());
    }

    std::size_t size() const { return pts_.size(); }

    // Indices of the k nearest points to q, sorted by (distance, index).
    std::vector<int> knn(const Point& q, int k) const {
        std::priority_queue<Entry> heap; // max-heap on distance
        if (root_ >= 0) search_knn(root_, q, static_cast<std::size_t>(k), heap);
        std::vector<Entry> out;
        out.reserve(heap.size());
        while (!heap.empty()) { out.push_back(heap.top()); heap.pop(); }
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
            return a.d2 != b.d2 ? a.d2 < b.d2 : a.idx < b.idx;
        });
        std::vector<int> idx(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) idx[i] = out[i].idx;
        return idx;
    }

    // Indices of all points within radius r of q (inclusive), sorted by index.
    std::vector<int> radius(const Point& q, double r) const {
        std::vector<int> out;
        if (root_ >= 0) search_radius(root_, q, r * r, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    // Index of the single nearest point (-1 on empty tree).
    int nearest(const Point& q) const {
        auto v = knn(q, 1);
        return v.empty() ? -1 : v[0];
    }

    double nearest_distance(const Point& q) const {
        int i = nearest(q);
        return i < 0 ? std::numeric_limits<double>::infinity() : (pts_[i] - q).norm();
    }

    const Point& point(int i) const { return pts_[i]; }

private:
    struct Node {
        int axis = -1;         // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        std::size_t begin = 0, end = 0; // into order_, leaves only
        Point lo, hi;                   // bounding box
    };
    struct Entry {
        double d2;
        int idx;
        bool operator<(const Entry& o) const { return d2 != o.d2 ? d2 < o.d2 : idx < o.idx; }
    };

    static constexpr std::size_t kLeafSize = 16;

    int build(std::size_t begin, std::size_t end) {
        Node node;
        node.lo = node.hi = pts_[order_[begin]];
        for (std::size_t i = begin + 1; i < end; ++i) {
            node.lo = node.lo.cwiseMin(pts_[order_[i]]);
            node.hi = node.hi.cwiseMax(pts_[order_[i]]);
        }
        if (end - begin <= kLeafSize) {
            node.begin = begin;
            node.end = end;
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size()) - 1;
        }
        int axis = 0;
        (node.hi - node.lo).maxCoeff(&axis);
        std::size_t mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             double pa = pts_[a][axis], pb = pts_[b][axis];
                             return pa != pb ? pa < pb : a < b;
                         });
        node.axis = axis;
        node.split = pts_[order_[mid]][axis];
        int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        int left = build(begin, mid);
        int right = build(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    double box_dist2(const Node& n, const Point& q) const {
        double d2 = 0.0;
        for (int a = 0; a < D; ++a) {
            double d = 0.0;
            if (q[a] < n.lo[a]) d = n.lo[a] - q[a];
            else if (q[a] > n.hi[a]) d = q[a] - n.hi[a];
            d2 += d * d;
        }
        return d2;
    }

    void search_knn(int ni, const Point& q, std::size_t k, std::priority_queue<Entry>& heap) const {
        const Node& n = nodes_[ni];
        if (heap.size() == k && box_dist2(n, q) > heap.top().d2) return;
        if (n.axis < 0) {
            for (std::size_t i = n.begin; i < n.end; ++i) {
                int idx = order_[i];
                double d2 = (pts_[idx] - q).squaredNorm();
                if (heap.size() < k) {
                    heap.push({d2, idx});
                } else if (d2 < heap.top().d2 ||
                           (d2 == heap.top().d2 && idx < heap.top().idx)) {
                    heap.pop();
                    heap.push({d2, idx});
                }
            }
            return;
        }
        int first = n.left, second = n.right;
        if (q[n.axis] > n.split) std::swap(first, second);
        search_knn(first, q, k, heap);
        search_knn(second, q, k, heap);
    }

    void search_radius(int ni, const Point& q, double r2, std::vector<int>& out) const {
        const Node& n = nodes_[ni];
        if (box_dist2(n, q) > r2) return;
        if (n.axis < 0) {
            for (std::size_t i = n.begin; i < n.end; ++i) {
                int idx = order_[i];
                if ((pts_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
            }
            return;
        }
        search_radius(n.left, q, r2, out);
        search_radius(n.right, q, r2, out);
    }

    std::vector<Point> pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

using KdTree2 = KdTree<2>;
using KdTree3 = KdTree<3>;

} // namespace cylfit
