#include "malleate/common_info.hpp"

#include <cmath>
#include <numeric>

#include "malleate/info.hpp"

namespace malleate {

namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }

  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

CommonDecomposition gacs_korner(const JointDistribution& d) {
  const int kx = d.size_x(), ky = d.size_y();
  // Nodes 0..kx-1 are X symbols, kx..kx+ky-1 are Y symbols.
  UnionFind uf(kx + ky);
  for (int x = 0; x < kx; ++x) {
    for (int y = 0; y < ky; ++y) {
      if (d.pxy()(x, y) > kStructuralZero) uf.unite(x, kx + y);
    }
  }

  CommonDecomposition out;
  out.x_component.assign(static_cast<std::size_t>(kx), -1);
  out.y_component.assign(static_cast<std::size_t>(ky), -1);
  std::vector<int> root_to_component(static_cast<std::size_t>(kx + ky), -1);
  std::vector<double> probs;

  const Eigen::VectorXd px = d.marginal_x();
  const Eigen::VectorXd py = d.marginal_y();
  for (int x = 0; x < kx; ++x) {
    if (px[x] <= kStructuralZero) continue;
    const int root = uf.find(x);
    int& comp = root_to_component[static_cast<std::size_t>(root)];
    if (comp < 0) {
      comp = static_cast<int>(probs.size());
      probs.push_back(0.0);
    }
    out.x_component[static_cast<std::size_t>(x)] = comp;
    probs[static_cast<std::size_t>(comp)] += px[x];
  }
  for (int y = 0; y < ky; ++y) {
    if (py[y] <= kStructuralZero) continue;
    const int root = uf.find(kx + y);
    const int comp = root_to_component[static_cast<std::size_t>(root)];
    // Every positive-marginal y is attached to some positive-marginal x
    // through a support edge, so its component already exists.
    out.y_component[static_cast<std::size_t>(y)] = comp;
  }

  out.num_components = static_cast<int>(probs.size());
  out.component_probs = Eigen::Map<const Eigen::VectorXd>(probs.data(),
                                                          static_cast<int>(probs.size()));
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  out.c_value = h / std::log(d.log_base());
  return out;
}

bool is_indecomposable(const JointDistribution& d) {
  return gacs_korner(d).num_components <= 1;
}

double converse_malleability_bound(const JointDistribution& d) {
  return entropy_y(d) - gacs_korner(d).c_value;
}

}  // namespace malleate
