#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajfw/forward.hpp"
#include "trajfw/paths.hpp"
#include "trajfw/transport.hpp"

namespace trajfw {

/// Nodes of one DAG layer. Consecutive nodes sharing a position form a group;
/// the DP evaluates the geometric part of a step once per pair of groups.
struct MeshLayer {
  std::vector<double> masses;
  std::vector<double> positions;  // row-major, size() x dim

  std::size_t size() const { return masses.size(); }
  MassPos node(std::size_t i, int dim) const;
};

class Mesh {
 public:
  Mesh(int dim, std::vector<MeshLayer> layers);
  static Mesh from_nodes(const std::vector<std::vector<MassPos>>& layers);

  int dim() const { return dim_; }
  std::size_t layer_count() const { return layers_.size(); }
  const MeshLayer& layer(std::size_t j) const { return layers_[j]; }
  MassPos node(std::size_t j, std::size_t i) const { return layers_[j].node(i, dim_); }
  /// Edge count sum_j |layer j-1| * |layer j|.
  double edge_count() const;

 private:
  int dim_;
  std::vector<MeshLayer> layers_;
};

/// Fresh independent draws per layer: M masses ~ U[0,1] (or {1} when M = 0)
/// crossed with N^2 positions ~ U[0,1]^2.
Mesh random_mesh(const TimeGrid& grid, int N, int M, std::uint64_t seed);

/// Identical layers: masses {0, 1/M, ..., 1} (or {1} when M = 0) crossed with
/// the lattice {0, 1/Ntilde, ..., 1}^2.
Mesh uniform_mesh(const TimeGrid& grid, int Ntilde, int M);

struct OracleResult {
  std::vector<KnotPath> paths;
  std::vector<double> values;                    // nondecreasing
  std::vector<std::vector<std::size_t>> nodes;  // node index per layer
};

struct OracleOptions {
  int k = 1;
  std::optional<double> vmax;
  int threads = 1;  // 0 = hardware concurrency
};

/// Minimises sum_j h_j eta_j(x_j) + sum_j step_j over paths through the mesh
/// layers. Returns the best path ending at each final node, the k smallest of
/// them. Ties go to the smallest predecessor index.
OracleResult dp_shortest_paths(const Mesh& mesh, const GridPtr& grid,
                               const std::vector<GradientField>& eta, const StepCost& cost,
                               const OracleOptions& opts = {});

/// Exhaustive enumeration with the same contract; refuses more than 1e6 paths.
OracleResult brute_force_oracle(const Mesh& mesh, const GridPtr& grid,
                                const std::vector<GradientField>& eta, const StepCost& cost,
                                const OracleOptions& opts = {});

/// Whether |dx|^2 is within the speed bound over an interval of length dt.
bool within_speed(double dist2, std::optional<double> vmax, double dt);

struct BenchRow {
  std::string series;
  std::string label;
  int intervals = 0;
  std::size_t nodes_per_layer = 0;
  double edges = 0.0;
  double ms = 0.0;
};

struct BenchCase {
  int Ntilde = 8;
  int M = 0;
};

/// Times the DP on uniform meshes against a fixed smooth random field.
std::vector<BenchRow> oracle_bench(const std::vector<BenchCase>& cases, int intervals,
                                   const StepCost& cost, int min_reps = 3,
                                   double min_seconds = 0.2, int threads = 1);

}  // namespace trajfw
