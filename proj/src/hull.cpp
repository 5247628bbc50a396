#include "tileforge/hull.hpp"

#include "tileforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace tileforge {

namespace {

double factorial(std::size_t n)
{
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i)
        f *= static_cast<double>(i);
    return f;
}

// Generalised cross product of the d-1 edge vectors v_i - v_0.
Eigen::VectorXd cofactor_normal(const Eigen::MatrixXd& pts, const std::vector<std::size_t>& idx)
{
    const Eigen::Index d = pts.rows();
    Eigen::MatrixXd edges(d - 1, d);
    for (Eigen::Index i = 1; i < d; ++i)
        edges.row(i - 1) = (pts.col(idx[i]) - pts.col(idx[0])).transpose();
    Eigen::VectorXd n(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        Eigen::MatrixXd minor(d - 1, d - 1);
        for (Eigen::Index c = 0, j = 0; c < d; ++c) {
            if (c == k)
                continue;
            minor.col(j++) = edges.col(c);
        }
        double det = d == 1 ? 1.0 : minor.determinant();
        n[k] = (k % 2 == 0 ? 1.0 : -1.0) * det;
    }
    return n;
}

} // namespace

ConvexHull convex_hull(const Eigen::MatrixXd& points)
{
    const std::size_t d = static_cast<std::size_t>(points.rows());
    const std::size_t n = static_cast<std::size_t>(points.cols());
    if (d == 0 || n == 0)
        throw Error(ErrorCode::degenerate, "empty point set");

    const Eigen::VectorXd lo = points.rowwise().minCoeff();
    const Eigen::VectorXd hi = points.rowwise().maxCoeff();
    const double scale = std::max(1e-300, (hi - lo).maxCoeff());
    const double eps = 1e-10 * scale;

    // Initial simplex: greedily maximise the distance to the current affine span.
    std::vector<std::size_t> simplex;
    {
        Eigen::Index first = 0;
        points.row(0).minCoeff(&first);
        simplex.push_back(static_cast<std::size_t>(first));
        Eigen::MatrixXd basis(d, 0);
        while (simplex.size() < d + 1) {
            double best = -1.0;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < n; ++i) {
                Eigen::VectorXd v = points.col(i) - points.col(simplex[0]);
                if (basis.cols() > 0)
                    v -= basis * (basis.transpose() * v);
                double dist = v.norm();
                if (dist > best) {
                    best = dist;
                    arg = i;
                }
            }
            if (best <= eps)
                throw Error(ErrorCode::degenerate, "points do not span the space (rank " +
                                                       std::to_string(simplex.size() - 1) + " < " +
                                                       std::to_string(d) + ")");
            Eigen::VectorXd v = points.col(arg) - points.col(simplex[0]);
            if (basis.cols() > 0)
                v -= basis * (basis.transpose() * v);
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = v.normalized();
            simplex.push_back(arg);
        }
    }
    Eigen::VectorXd centre = Eigen::VectorXd::Zero(d);
    for (std::size_t i : simplex)
        centre += points.col(i);
    centre /= static_cast<double>(d + 1);

    struct Work {
        std::vector<std::size_t> v;
        Eigen::VectorXd normal;
        double offset;
        bool alive;
    };
    std::vector<Work> facets;
    auto make = [&](std::vector<std::size_t> v) {
        Eigen::VectorXd nrm = cofactor_normal(points, v);
        double len = nrm.norm();
        if (len > 0)
            nrm /= len;
        double off = nrm.dot(points.col(v[0]));
        if (nrm.dot(centre) > off) {
            nrm = -nrm;
            off = -off;
        }
        facets.push_back({std::move(v), std::move(nrm), off, true});
    };
    for (std::size_t skip = 0; skip <= d; ++skip) {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i <= d; ++i)
            if (i != skip)
                v.push_back(simplex[i]);
        make(std::move(v));
    }

    // Farthest points first keeps the intermediate hulls large.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i)
        dist[i] = (points.col(i) - centre).squaredNorm();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });

    std::vector<std::size_t> visible;
    std::map<std::vector<std::size_t>, int> ridges;
    std::size_t dead = 0;
    for (std::size_t p : order) {
        visible.clear();
        for (std::size_t f = 0; f < facets.size(); ++f)
            if (facets[f].alive && facets[f].normal.dot(points.col(p)) - facets[f].offset > eps)
                visible.push_back(f);
        if (visible.empty())
            continue;
        ridges.clear();
        for (std::size_t f : visible) {
            facets[f].alive = false;
            for (std::size_t skip = 0; skip < d; ++skip) {
                std::vector<std::size_t> r;
                for (std::size_t i = 0; i < d; ++i)
                    if (i != skip)
                        r.push_back(facets[f].v[i]);
                std::sort(r.begin(), r.end());
                ++ridges[r];
            }
        }
        for (const auto& [r, count] : ridges)
            if (count == 1) {
                std::vector<std::size_t> v = r;
                v.push_back(p);
                make(std::move(v));
            }
        dead += visible.size();
        if (dead > 256 && 2 * dead > facets.size()) {
            std::erase_if(facets, [](const Work& w) { return !w.alive; });
            dead = 0;
        }
    }

    ConvexHull hull;
    hull.dim = d;
    const double df = factorial(d);
    const double dm1 = factorial(d - 1);
    for (auto& w : facets) {
        if (!w.alive)
            continue;
        ConvexHull::Facet f;
        Eigen::VectorXd raw = cofactor_normal(points, w.v);
        f.area = raw.norm() / dm1;
        f.vertices = w.v;
        f.normal = w.normal;
        f.offset = w.offset;
        Eigen::MatrixXd cone(d, d);
        for (std::size_t i = 0; i < d; ++i)
            cone.col(static_cast<Eigen::Index>(i)) = points.col(w.v[i]) - centre;
        hull.volume += std::abs(cone.determinant()) / df;
        hull.vertices.insert(hull.vertices.end(), w.v.begin(), w.v.end());
        hull.facets.push_back(std::move(f));
    }
    std::sort(hull.vertices.begin(), hull.vertices.end());
    hull.vertices.erase(std::unique(hull.vertices.begin(), hull.vertices.end()), hull.vertices.end());
    return hull;
}

std::vector<std::pair<Eigen::VectorXd, double>> ConvexHull::merged_normals(double angle_tol) const
{
    std::vector<std::pair<Eigen::VectorXd, double>> out;
    for (const auto& f : facets) {
        if (f.area <= 0.0)
            continue;
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const auto& e) { return e.first.dot(f.normal) > 1.0 - angle_tol; });
        if (it == out.end())
            out.push_back({f.normal, f.area});
        else
            it->second += f.area;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::vector<std::size_t> ConvexHull::extreme_vertices(double angle_tol) const
{
    std::map<std::size_t, std::vector<const Eigen::VectorXd*>> incident;
    for (const auto& f : facets) {
        if (f.area <= 0.0)
            continue;
        for (std::size_t v : f.vertices) {
            auto& list = incident[v];
            if (std::none_of(list.begin(), list.end(), [&](const Eigen::VectorXd* n) { return n->dot(f.normal) > 1.0 - angle_tol; }))
                list.push_back(&f.normal);
        }
    }
    std::vector<std::size_t> out;
    for (const auto& [v, list] : incident) {
        if (list.size() < dim)
            continue;
        Eigen::MatrixXd n(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(list.size()));
        for (std::size_t j = 0; j < list.size(); ++j)
            n.col(static_cast<Eigen::Index>(j)) = *list[j];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(n);
        lu.setThreshold(1e-6);
        if (lu.rank() == static_cast<Eigen::Index>(dim))
            out.push_back(v);
    }
    return out;
}

} // namespace tileforge
