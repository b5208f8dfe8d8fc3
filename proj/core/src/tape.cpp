#include "cellopt/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace cellopt {

namespace {
const char* op_name(Tape::Op op) {
  switch (op) {
    case Tape::Op::kLeaf: return "leaf";
    case Tape::Op::kAffine: return "affine";
    case Tape::Op::kSigmoid: return "sigmoid";
    case Tape::Op::kTanh: return "tanh";
    case Tape::Op::kRelu: return "relu";
    case Tape::Op::kConcat: return "concat";
    case Tape::Op::kSlice: return "slice";
    case Tape::Op::kHadamard: return "hadamard";
    case Tape::Op::kAdd: return "add";
    case Tape::Op::kAxpb: return "axpb";
    case Tape::Op::kSum: return "sum";
    case Tape::Op::kMean: return "mean";
    case Tape::Op::kSquaredError: return "squared_error";
  }
  return "?";
}
}  // namespace

int Tape::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw std::invalid_argument("tape: invalid node id " + std::to_string(id));
  return id;
}

std::string Tape::describe(NodeId id) const {
  const Node& n = nodes_[id];
  std::string s = std::string(op_name(n.op)) + " node #" + std::to_string(id);
  if (!n.name.empty()) s += " ('" + n.name + "')";
  return s;
}

void Tape::fail(NodeId id, const std::string& msg) const {
  throw std::invalid_argument("tape: " + describe(id) + ": " + msg);
}

NodeId Tape::push(Node n) {
  n.offset = static_cast<int>(values_.size());
  values_.resize(values_.size() + static_cast<std::size_t>(n.dim), 0.0);
  adjoints_.resize(values_.size(), 0.0);
  nodes_.push_back(std::move(n));
  evaluated_ = false;
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(std::string name, int dim) {
  if (dim <= 0) throw std::invalid_argument("tape: input '" + name + "': dim must be > 0");
  if (leaves_.count(name))
    throw std::invalid_argument("tape: duplicate leaf name '" + name + "'");
  Node n;
  n.op = Op::kLeaf;
  n.dim = dim;
  n.name = name;
  NodeId id = push(std::move(n));
  leaves_.emplace(std::move(name), id);
  return id;
}

NodeId Tape::matrix_input(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("tape: matrix input '" + name + "': bad shape");
  NodeId id = input(std::move(name), rows * cols);
  nodes_[id].rows = rows;
  nodes_[id].cols = cols;
  return id;
}

NodeId Tape::affine(NodeId w, NodeId x, NodeId b) {
  const Node& wn = node(w);
  const Node& xn = node(x);
  if (wn.rows == 0 || wn.cols == 0)
    fail(w, "affine weight must be a matrix leaf");
  if (xn.dim != wn.cols)
    fail(x, "affine input dim " + std::to_string(xn.dim) + " != weight cols " +
             std::to_string(wn.cols));
  if (b >= 0 && node(b).dim != wn.rows)
    fail(b, "affine bias dim " + std::to_string(node(b).dim) + " != weight rows " +
             std::to_string(wn.rows));
  Node n;
  n.op = Op::kAffine;
  n.dim = wn.rows;
  n.a = w;
  n.b = x;
  n.c = b;
  n.rows = wn.rows;
  n.cols = wn.cols;
  return push(std::move(n));
}

NodeId Tape::affine(NodeId w, NodeId x) { return affine(w, x, -1); }

NodeId Tape::sigmoid(NodeId x) {
  Node n; n.op = Op::kSigmoid; n.dim = node(x).dim; n.a = x;
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId x) {
  Node n; n.op = Op::kTanh; n.dim = node(x).dim; n.a = x;
  return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
  Node n; n.op = Op::kRelu; n.dim = node(x).dim; n.a = x;
  return push(std::move(n));
}

NodeId Tape::concat(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("tape: concat of zero nodes");
  Node n;
  n.op = Op::kConcat;
  n.concat_begin = static_cast<int>(concat_args_.size());
  n.concat_count = static_cast<int>(parts.size());
  int dim = 0;
  for (NodeId p : parts) {
    dim += node(p).dim;
    concat_args_.push_back(p);
  }
  n.dim = dim;
  return push(std::move(n));
}

NodeId Tape::slice(NodeId x, int start, int len) {
  const Node& xn = node(x);
  if (start < 0 || len <= 0 || start + len > xn.dim)
    fail(x, "slice [" + std::to_string(start) + ", " + std::to_string(start + len) +
             ") out of range for dim " + std::to_string(xn.dim));
  Node n; n.op = Op::kSlice; n.dim = len; n.a = x; n.start = start;
  return push(std::move(n));
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  if (node(a).dim != node(b).dim)
    fail(a, "hadamard dims " + std::to_string(node(a).dim) + " vs " +
             std::to_string(node(b).dim));
  Node n; n.op = Op::kHadamard; n.dim = node(a).dim; n.a = a; n.b = b;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  if (node(a).dim != node(b).dim)
    fail(a, "add dims " + std::to_string(node(a).dim) + " vs " +
             std::to_string(node(b).dim));
  Node n; n.op = Op::kAdd; n.dim = node(a).dim; n.a = a; n.b = b;
  return push(std::move(n));
}

NodeId Tape::axpb(NodeId x, double a, double b) {
  Node n; n.op = Op::kAxpb; n.dim = node(x).dim; n.a = x; n.ca = a; n.cb = b;
  return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
  Node n; n.op = Op::kSum; n.dim = 1; n.a = x;
  return push(std::move(n));
}

NodeId Tape::mean(NodeId x) {
  Node n; n.op = Op::kMean; n.dim = 1; n.a = x;
  return push(std::move(n));
}

NodeId Tape::squared_error(NodeId x, NodeId y) {
  if (node(x).dim != node(y).dim)
    fail(x, "squared_error dims " + std::to_string(node(x).dim) + " vs " +
             std::to_string(node(y).dim));
  Node n; n.op = Op::kSquaredError; n.dim = 1; n.a = x; n.b = y;
  return push(std::move(n));
}

void Tape::set_output(NodeId id) {
  check_id(id);
  output_ = id;
  evaluated_ = false;
}

void Tape::bind(NodeId leaf, std::span<const double> values) {
  Node& n = nodes_[check_id(leaf)];
  if (n.op != Op::kLeaf) fail(leaf, "bind target is not a leaf");
  if (values.size() != static_cast<std::size_t>(n.dim))
    fail(leaf, "bound " + std::to_string(values.size()) + " values, expected " +
                   std::to_string(n.dim));
  std::memcpy(&values_[n.offset], values.data(), values.size() * sizeof(double));
  n.bound = true;
  evaluated_ = false;
}

void Tape::bind(std::string_view name, std::span<const double> values) {
  bind(leaf_id(name), values);
}

NodeId Tape::leaf_id(std::string_view name) const {
  auto it = leaves_.find(std::string(name));
  if (it == leaves_.end())
    throw std::invalid_argument("tape: unknown leaf '" + std::string(name) + "'");
  return it->second;
}

bool Tape::has_leaf(std::string_view name) const {
  return leaves_.count(std::string(name)) > 0;
}

std::span<const double> Tape::eval() {
  if (output_ < 0) throw std::runtime_error("tape: no output set");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    double* out = &values_[n.offset];
    switch (n.op) {
      case Op::kLeaf:
        if (!n.bound) fail(static_cast<NodeId>(i), "evaluated before binding");
        break;
      case Op::kAffine: {
        const double* w = &values_[nodes_[n.a].offset];
        const double* x = &values_[nodes_[n.b].offset];
        const int rows = n.rows, cols = n.cols;
        int r = 0;
        for (; r + 2 <= rows; r += 2) {
          const double* w0 = w + static_cast<std::size_t>(r) * cols;
          const double* w1 = w0 + cols;
          double s0 = 0.0, s1 = 0.0;
          for (int j = 0; j < cols; ++j) {
            s0 += w0[j] * x[j];
            s1 += w1[j] * x[j];
          }
          out[r] = s0;
          out[r + 1] = s1;
        }
        for (; r < rows; ++r) {
          const double* wr = w + static_cast<std::size_t>(r) * cols;
          double s = 0.0;
          for (int j = 0; j < cols; ++j) s += wr[j] * x[j];
          out[r] = s;
        }
        if (n.c >= 0) {
          const double* b = &values_[nodes_[n.c].offset];
          for (int k = 0; k < rows; ++k) out[k] += b[k];
        }
        break;
      }
      case Op::kSigmoid: {
        const double* x = &values_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k) out[k] = 1.0 / (1.0 + std::exp(-x[k]));
        break;
      }
      case Op::kTanh: {
        const double* x = &values_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k) out[k] = std::tanh(x[k]);
        break;
      }
      case Op::kRelu: {
        const double* x = &values_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k) out[k] = x[k] > 0.0 ? x[k] : 0.0;
        break;
      }
      case Op::kConcat: {
        int pos = 0;
        for (int p = 0; p < n.concat_count; ++p) {
          const Node& part = nodes_[concat_args_[n.concat_begin + p]];
          std::memcpy(out + pos, &values_[part.offset],
                      static_cast<std::size_t>(part.dim) * sizeof(double));
          pos += part.dim;
        }
        break;
      }
      case Op::kSlice: {
        const double* x = &values_[nodes_[n.a].offset];
        std::memcpy(out, x + n.start, static_cast<std::size_t>(n.dim) * sizeof(double));
        break;
      }
      case Op::kHadamard: {
        const double* x = &values_[nodes_[n.a].offset];
        const double* y = &values_[nodes_[n.b].offset];
        for (int k = 0; k < n.dim; ++k) out[k] = x[k] * y[k];
        break;
      }
      case Op::kAdd: {
        const double* x = &values_[nodes_[n.a].offset];
        const double* y = &values_[nodes_[n.b].offset];
        for (int k = 0; k < n.dim; ++k) out[k] = x[k] + y[k];
        break;
      }
      case Op::kAxpb: {
        const double* x = &values_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k) out[k] = n.ca * x[k] + n.cb;
        break;
      }
      case Op::kSum: {
        const double* x = &values_[nodes_[n.a].offset];
        double s = 0.0;
        for (int k = 0; k < nodes_[n.a].dim; ++k) s += x[k];
        out[0] = s;
        break;
      }
      case Op::kMean: {
        const double* x = &values_[nodes_[n.a].offset];
        double s = 0.0;
        const int d = nodes_[n.a].dim;
        for (int k = 0; k < d; ++k) s += x[k];
        out[0] = s / d;
        break;
      }
      case Op::kSquaredError: {
        const double* x = &values_[nodes_[n.a].offset];
        const double* y = &values_[nodes_[n.b].offset];
        double s = 0.0;
        for (int k = 0; k < nodes_[n.a].dim; ++k) {
          double d = x[k] - y[k];
          s += d * d;
        }
        out[0] = s;
        break;
      }
    }
  }
  evaluated_ = true;
  const Node& o = nodes_[output_];
  return {&values_[o.offset], static_cast<std::size_t>(o.dim)};
}

double Tape::eval_scalar() {
  auto v = eval();
  if (v.size() != 1) throw std::runtime_error("tape: output is not scalar");
  return v[0];
}

void Tape::backward() {
  if (output_ < 0) throw std::runtime_error("tape: no output set");
  if (!evaluated_)
    throw std::runtime_error("tape: backward() requires eval() with current bindings");
  if (nodes_[output_].dim != 1)
    throw std::runtime_error("tape: backward() requires a scalar output");
  std::fill(adjoints_.begin(), adjoints_.end(), 0.0);
  adjoints_[nodes_[output_].offset] = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    const Node& n = nodes_[i];
    const double* dn = &adjoints_[n.offset];
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kAffine: {
        double* dw = &adjoints_[nodes_[n.a].offset];
        double* dx = &adjoints_[nodes_[n.b].offset];
        const double* w = &values_[nodes_[n.a].offset];
        const double* x = &values_[nodes_[n.b].offset];
        const int rows = n.rows, cols = n.cols;
        for (int r = 0; r < rows; ++r) {
          const double g = dn[r];
          if (g == 0.0) continue;
          double* dwr = dw + static_cast<std::size_t>(r) * cols;
          const double* wr = w + static_cast<std::size_t>(r) * cols;
          for (int j = 0; j < cols; ++j) {
            dwr[j] += g * x[j];
            dx[j] += g * wr[j];
          }
        }
        if (n.c >= 0) {
          double* db = &adjoints_[nodes_[n.c].offset];
          for (int r = 0; r < rows; ++r) db[r] += dn[r];
        }
        break;
      }
      case Op::kSigmoid: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        const double* y = &values_[n.offset];
        for (int k = 0; k < n.dim; ++k) dx[k] += dn[k] * y[k] * (1.0 - y[k]);
        break;
      }
      case Op::kTanh: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        const double* y = &values_[n.offset];
        for (int k = 0; k < n.dim; ++k) dx[k] += dn[k] * (1.0 - y[k] * y[k]);
        break;
      }
      case Op::kRelu: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        const double* x = &values_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k)
          if (x[k] > 0.0) dx[k] += dn[k];
        break;
      }
      case Op::kConcat: {
        int pos = 0;
        for (int p = 0; p < n.concat_count; ++p) {
          const Node& part = nodes_[concat_args_[n.concat_begin + p]];
          double* dp = &adjoints_[part.offset];
          for (int k = 0; k < part.dim; ++k) dp[k] += dn[pos + k];
          pos += part.dim;
        }
        break;
      }
      case Op::kSlice: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k) dx[n.start + k] += dn[k];
        break;
      }
      case Op::kHadamard: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        double* dy = &adjoints_[nodes_[n.b].offset];
        const double* x = &values_[nodes_[n.a].offset];
        const double* y = &values_[nodes_[n.b].offset];
        for (int k = 0; k < n.dim; ++k) {
          dx[k] += dn[k] * y[k];
          dy[k] += dn[k] * x[k];
        }
        break;
      }
      case Op::kAdd: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        double* dy = &adjoints_[nodes_[n.b].offset];
        for (int k = 0; k < n.dim; ++k) {
          dx[k] += dn[k];
          dy[k] += dn[k];
        }
        break;
      }
      case Op::kAxpb: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        for (int k = 0; k < n.dim; ++k) dx[k] += n.ca * dn[k];
        break;
      }
      case Op::kSum: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        const double g = dn[0];
        for (int k = 0; k < nodes_[n.a].dim; ++k) dx[k] += g;
        break;
      }
      case Op::kMean: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        const double g = dn[0] / nodes_[n.a].dim;
        for (int k = 0; k < nodes_[n.a].dim; ++k) dx[k] += g;
        break;
      }
      case Op::kSquaredError: {
        double* dx = &adjoints_[nodes_[n.a].offset];
        double* dy = &adjoints_[nodes_[n.b].offset];
        const double* x = &values_[nodes_[n.a].offset];
        const double* y = &values_[nodes_[n.b].offset];
        const double g = dn[0];
        for (int k = 0; k < nodes_[n.a].dim; ++k) {
          double d = 2.0 * (x[k] - y[k]) * g;
          dx[k] += d;
          dy[k] -= d;
        }
        break;
      }
    }
  }
}

std::span<const double> Tape::adjoint(NodeId id) const {
  const Node& n = node(id);
  return {&adjoints_[n.offset], static_cast<std::size_t>(n.dim)};
}

std::span<const double> Tape::adjoint(std::string_view leaf_name) const {
  return adjoint(leaf_id(leaf_name));
}

std::vector<std::vector<double>> Tape::gradients(const std::vector<std::string>& wrt) {
  eval();
  backward();
  std::vector<std::vector<double>> out;
  out.reserve(wrt.size());
  for (const auto& name : wrt) {
    auto a = adjoint(name);
    out.emplace_back(a.begin(), a.end());
  }
  return out;
}

bool Tape::depends_on(NodeId id, NodeId leaf) const {
  check_id(id);
  check_id(leaf);
  std::vector<NodeId> stack{id};
  std::vector<bool> seen(nodes_.size(), false);
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    if (cur == leaf) return true;
    if (cur < 0 || seen[cur]) continue;
    seen[cur] = true;
    const Node& n = nodes_[cur];
    if (n.op == Op::kConcat) {
      for (int p = 0; p < n.concat_count; ++p)
        stack.push_back(concat_args_[n.concat_begin + p]);
    } else {
      if (n.a >= 0) stack.push_back(n.a);
      if (n.b >= 0) stack.push_back(n.b);
      if (n.c >= 0) stack.push_back(n.c);
    }
  }
  return false;
}

}  // namespace cellopt
