#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cellopt {

using NodeId = int;

// Reverse-mode tape over a fixed primitive set: affine, sigmoid/tanh/relu,
// concat, slice, Hadamard, add, elementwise a*x+b, sum, mean, squared error.
// Nodes are appended in topological order; one backward pass fills every
// adjoint reachable from a scalar output. Parameters and inputs are both
// named leaves, so gradients are available with respect to either.
//
// A tape instance holds its own value/adjoint slots and is single-use-at-a-
// time; concurrent evaluation needs one tape per thread. Bound leaf data is
// copied in, never mutated.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kLeaf,
    kAffine,      // W x + b (b optional)
    kSigmoid,
    kTanh,
    kRelu,
    kConcat,
    kSlice,
    kHadamard,
    kAdd,
    kAxpb,        // elementwise a*x + b, scalar a, b
    kSum,
    kMean,
    kSquaredError // sum_i (x_i - y_i)^2
  };

  // Leaves. Matrix leaves are row-major and feed affine nodes as W.
  NodeId input(std::string name, int dim);
  NodeId matrix_input(std::string name, int rows, int cols);

  NodeId affine(NodeId w, NodeId x, NodeId b);
  NodeId affine(NodeId w, NodeId x);  // no bias
  NodeId sigmoid(NodeId x);
  NodeId tanh(NodeId x);
  NodeId relu(NodeId x);
  NodeId concat(const std::vector<NodeId>& parts);
  NodeId slice(NodeId x, int start, int len);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId axpb(NodeId x, double a, double b);
  NodeId sum(NodeId x);
  NodeId mean(NodeId x);
  NodeId squared_error(NodeId x, NodeId y);

  void set_output(NodeId id);
  NodeId output() const { return output_; }

  void bind(NodeId leaf, std::span<const double> values);
  void bind(std::string_view name, std::span<const double> values);

  // Forward pass; every leaf must have been bound at least once.
  std::span<const double> eval();
  double eval_scalar();

  // Reverse pass. Requires a scalar output and a preceding eval() with the
  // current bindings. Adjoints of fan-out nodes accumulate additively.
  void backward();

  std::span<const double> adjoint(NodeId node) const;
  std::span<const double> adjoint(std::string_view leaf_name) const;

  // Gradients for a set of leaves, in call order (eval + backward + read).
  std::vector<std::vector<double>> gradients(const std::vector<std::string>& wrt);

  int dim(NodeId id) const { return nodes_[check_id(id)].dim; }
  NodeId leaf_id(std::string_view name) const;
  bool has_leaf(std::string_view name) const;
  // Structural reachability: true if `leaf` is an ancestor of `node`.
  bool depends_on(NodeId node, NodeId leaf) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    int dim = 0;
    int offset = 0;         // into values_/adjoints_
    int a = -1, b = -1, c = -1;
    int rows = 0, cols = 0; // matrix leaves
    int start = 0;          // slice
    double ca = 0.0, cb = 0.0;  // axpb coefficients
    int concat_begin = 0, concat_count = 0;
    std::string name;       // leaves only
    bool bound = false;
  };

  NodeId push(Node n);
  int check_id(NodeId id) const;
  const Node& node(NodeId id) const { return nodes_[check_id(id)]; }
  [[noreturn]] void fail(NodeId id, const std::string& msg) const;
  std::string describe(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<int> concat_args_;
  std::vector<double> values_;
  std::vector<double> adjoints_;
  std::unordered_map<std::string, NodeId> leaves_;
  NodeId output_ = -1;
  bool evaluated_ = false;
};

}  // namespace cellopt
