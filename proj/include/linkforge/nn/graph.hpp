#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace linkforge::nn {

struct Tensor {
    int rows = 0, cols = 0;
    std::vector<double> v;
    std::vector<double> g;

    Tensor() = default;
    Tensor(int r, int c)
        : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0), g(static_cast<size_t>(r) * c, 0.0) {}

    size_t size() const { return v.size(); }
};

// Named trainable arrays; iteration order is registration order everywhere
// (updates, serialization), which keeps training byte-reproducible.
class ParamStore {
public:
    Tensor* add(const std::string& name, int rows, int cols);
    Tensor* find(const std::string& name);
    const Tensor* find(const std::string& name) const;

    const std::vector<std::pair<std::string, std::unique_ptr<Tensor>>>& entries() const {
        return entries_;
    }

    void zero_grad();
    size_t total_values() const;

private:
    std::vector<std::pair<std::string, std::unique_ptr<Tensor>>> entries_;
};

// Reverse-mode tape with shapes fixed at build time. Build the network once,
// then per sample: set inputs, forward(), backward(loss). Every forward runs
// the identical op sequence, so inference cost is input-independent.
// backward() adds parameter gradients into Tensor::g without clearing them,
// which is how per-sample gradients accumulate over a batch.
class Graph {
public:
    using Id = int;

    Id input(int rows, int cols);
    Id iinput(int count);  // integer side input (token ids, chosen options)
    Id param(Tensor* t);

    Id matmul(Id a, Id b);     // A·B
    Id matmul_nt(Id a, Id b);  // A·Bᵀ
    Id add(Id a, Id b);
    Id add_row(Id a, Id row);  // broadcast a [1×C] row over every row of a
    Id mul(Id a, Id b);        // elementwise
    Id scale(Id a, double s);
    Id relu(Id a);
    Id softmax_rows(Id a);
    Id log_softmax_rows(Id a);
    Id layer_norm(Id a, Id gain, Id bias);  // per-row, eps 1e-5
    Id mean_rows(Id a);                     // [R×C] -> [1×C]
    Id concat_rows(const std::vector<Id>& parts);
    Id concat_cols(const std::vector<Id>& parts);
    Id slice_cols(Id a, int start, int count);
    Id gather_rows(Id table, Id ids);  // embedding lookup, ids an iinput
    Id scale_rows(Id a, Id mask);      // mask [R×1] multiplies each row
    Id pick(Id a, Id ids, int elem);   // scalar a.flat[ids[elem]]
    Id sum(Id a);                      // all elements -> [1×1]

    void set_input(Id id, const std::vector<double>& values);
    void set_input_float(Id id, const std::vector<float>& values);
    void set_scalar(Id id, double value);
    void set_iinput(Id id, const std::vector<int>& values);

    int rows(Id id) const;
    int cols(Id id) const;
    const std::vector<double>& values(Id id) const;
    double scalar(Id id) const;

    void forward();
    void backward(Id loss);  // throws std::logic_error before any forward()

    int op_count() const;  // non-leaf nodes, fixed after construction

private:
    enum class Op {
        Input, IInput, Param, Matmul, MatmulNT, Add, AddRow, Mul, Scale, Relu,
        SoftmaxRows, LogSoftmaxRows, LayerNorm, MeanRows, ConcatRows, ConcatCols,
        SliceCols, GatherRows, ScaleRows, Pick, Sum,
    };

    struct Node {
        Op op;
        int r = 0, c = 0;
        std::vector<int> in;     // tensor-node inputs
        int iv = -1;             // integer-input index (GatherRows, Pick)
        int a0 = 0, a1 = 0;      // op constants (slice bounds, pick element)
        double s = 0.0;          // scale factor
        Tensor* pt = nullptr;    // param binding
        bool needs_grad = false;
        std::vector<double> v;
        std::vector<double> g;
        std::vector<double> aux;  // layer-norm per-row mean and inv-std
    };

    Id add_node(Node n);
    Node& at(Id id) { return nodes_[static_cast<size_t>(id)]; }
    const Node& at(Id id) const { return nodes_[static_cast<size_t>(id)]; }
    double* val(Node& n) { return n.pt ? n.pt->v.data() : n.v.data(); }
    const double* val(const Node& n) const { return n.pt ? n.pt->v.data() : n.v.data(); }
    double* grad(Node& n) { return n.pt ? n.pt->g.data() : n.g.data(); }
    void check_shape(Id id, int r, int c, const char* what) const;

    void forward_node(Node& n);
    void backward_node(Node& n);

    std::vector<Node> nodes_;
    std::vector<std::vector<int>> ivals_;
    bool ran_forward_ = false;
};

}  // namespace linkforge::nn
