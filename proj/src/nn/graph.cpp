#include "linkforge/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace linkforge::nn {

Tensor* ParamStore::add(const std::string& name, int rows, int cols) {
    if (find(name)) throw std::logic_error("duplicate parameter name: " + name);
    entries_.emplace_back(name, std::make_unique<Tensor>(rows, cols));
    return entries_.back().second.get();
}

Tensor* ParamStore::find(const std::string& name) {
    for (auto& [n, t] : entries_)
        if (n == name) return t.get();
    return nullptr;
}

const Tensor* ParamStore::find(const std::string& name) const {
    for (const auto& [n, t] : entries_)
        if (n == name) return t.get();
    return nullptr;
}

void ParamStore::zero_grad() {
    for (auto& [n, t] : entries_) std::fill(t->g.begin(), t->g.end(), 0.0);
}

size_t ParamStore::total_values() const {
    size_t n = 0;
    for (const auto& [name, t] : entries_) n += t->size();
    return n;
}

namespace {

// C[MxN] += A[MxK] B[KxN]
void mm(const double* A, const double* B, double* C, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const double* a = A + static_cast<size_t>(i) * K;
        double* c = C + static_cast<size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const double av = a[k];
            const double* b = B + static_cast<size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// C[MxN] += A[MxK] B^T with B[NxK]
void mm_nt(const double* A, const double* B, double* C, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const double* a = A + static_cast<size_t>(i) * K;
        double* c = C + static_cast<size_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const double* b = B + static_cast<size_t>(j) * K;
            double s = 0.0;
            for (int k = 0; k < K; ++k) s += a[k] * b[k];
            c[j] += s;
        }
    }
}

// C[KxN] += A^T B with A[MxK], B[MxN]
void mm_tn(const double* A, const double* B, double* C, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const double* a = A + static_cast<size_t>(i) * K;
        const double* b = B + static_cast<size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const double av = a[k];
            double* c = C + static_cast<size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

constexpr double kLnEps = 1e-5;

}  // namespace

Graph::Id Graph::add_node(Node n) {
    if (n.op != Op::Param) {
        n.v.assign(static_cast<size_t>(n.r) * n.c, 0.0);
        n.g.assign(static_cast<size_t>(n.r) * n.c, 0.0);
    }
    if (!n.needs_grad)
        for (int i : n.in)
            if (at(i).needs_grad) n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

void Graph::check_shape(Id id, int r, int c, const char* what) const {
    const Node& n = at(id);
    if (n.r != r || n.c != c) throw std::logic_error(std::string("shape mismatch in ") + what);
}

Graph::Id Graph::input(int rows, int cols) {
    Node n;
    n.op = Op::Input;
    n.r = rows;
    n.c = cols;
    return add_node(std::move(n));
}

Graph::Id Graph::iinput(int count) {
    Node n;
    n.op = Op::IInput;
    n.iv = static_cast<int>(ivals_.size());
    ivals_.emplace_back(static_cast<size_t>(count), 0);
    return add_node(std::move(n));
}

Graph::Id Graph::param(Tensor* t) {
    Node n;
    n.op = Op::Param;
    n.r = t->rows;
    n.c = t->cols;
    n.pt = t;
    n.needs_grad = true;
    return add_node(std::move(n));
}

Graph::Id Graph::matmul(Id a, Id b) {
    if (at(a).c != at(b).r) throw std::logic_error("matmul inner dims differ");
    Node n;
    n.op = Op::Matmul;
    n.r = at(a).r;
    n.c = at(b).c;
    n.in = {a, b};
    return add_node(std::move(n));
}

Graph::Id Graph::matmul_nt(Id a, Id b) {
    if (at(a).c != at(b).c) throw std::logic_error("matmul_nt inner dims differ");
    Node n;
    n.op = Op::MatmulNT;
    n.r = at(a).r;
    n.c = at(b).r;
    n.in = {a, b};
    return add_node(std::move(n));
}

Graph::Id Graph::add(Id a, Id b) {
    check_shape(b, at(a).r, at(a).c, "add");
    Node n;
    n.op = Op::Add;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a, b};
    return add_node(std::move(n));
}

Graph::Id Graph::add_row(Id a, Id row) {
    check_shape(row, 1, at(a).c, "add_row");
    Node n;
    n.op = Op::AddRow;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a, row};
    return add_node(std::move(n));
}

Graph::Id Graph::mul(Id a, Id b) {
    check_shape(b, at(a).r, at(a).c, "mul");
    Node n;
    n.op = Op::Mul;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a, b};
    return add_node(std::move(n));
}

Graph::Id Graph::scale(Id a, double s) {
    Node n;
    n.op = Op::Scale;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a};
    n.s = s;
    return add_node(std::move(n));
}

Graph::Id Graph::relu(Id a) {
    Node n;
    n.op = Op::Relu;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a};
    return add_node(std::move(n));
}

Graph::Id Graph::softmax_rows(Id a) {
    Node n;
    n.op = Op::SoftmaxRows;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a};
    return add_node(std::move(n));
}

Graph::Id Graph::log_softmax_rows(Id a) {
    Node n;
    n.op = Op::LogSoftmaxRows;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a};
    return add_node(std::move(n));
}

Graph::Id Graph::layer_norm(Id a, Id gain, Id bias) {
    check_shape(gain, 1, at(a).c, "layer_norm gain");
    check_shape(bias, 1, at(a).c, "layer_norm bias");
    Node n;
    n.op = Op::LayerNorm;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a, gain, bias};
    n.aux.assign(static_cast<size_t>(at(a).r) * 2, 0.0);
    return add_node(std::move(n));
}

Graph::Id Graph::mean_rows(Id a) {
    Node n;
    n.op = Op::MeanRows;
    n.r = 1;
    n.c = at(a).c;
    n.in = {a};
    return add_node(std::move(n));
}

Graph::Id Graph::concat_rows(const std::vector<Id>& parts) {
    if (parts.empty()) throw std::logic_error("concat_rows needs inputs");
    Node n;
    n.op = Op::ConcatRows;
    n.c = at(parts[0]).c;
    for (Id p : parts) {
        if (at(p).c != n.c) throw std::logic_error("concat_rows column mismatch");
        n.r += at(p).r;
    }
    n.in = parts;
    return add_node(std::move(n));
}

Graph::Id Graph::concat_cols(const std::vector<Id>& parts) {
    if (parts.empty()) throw std::logic_error("concat_cols needs inputs");
    Node n;
    n.op = Op::ConcatCols;
    n.r = at(parts[0]).r;
    for (Id p : parts) {
        if (at(p).r != n.r) throw std::logic_error("concat_cols row mismatch");
        n.c += at(p).c;
    }
    n.in = parts;
    return add_node(std::move(n));
}

Graph::Id Graph::slice_cols(Id a, int start, int count) {
    if (start < 0 || count <= 0 || start + count > at(a).c)
        throw std::logic_error("slice_cols out of range");
    Node n;
    n.op = Op::SliceCols;
    n.r = at(a).r;
    n.c = count;
    n.in = {a};
    n.a0 = start;
    n.a1 = count;
    return add_node(std::move(n));
}

Graph::Id Graph::gather_rows(Id table, Id ids) {
    if (at(ids).op != Op::IInput) throw std::logic_error("gather_rows needs an integer input");
    Node n;
    n.op = Op::GatherRows;
    n.r = static_cast<int>(ivals_[at(ids).iv].size());
    n.c = at(table).c;
    n.in = {table};
    n.iv = at(ids).iv;
    return add_node(std::move(n));
}

Graph::Id Graph::scale_rows(Id a, Id mask) {
    check_shape(mask, at(a).r, 1, "scale_rows mask");
    Node n;
    n.op = Op::ScaleRows;
    n.r = at(a).r;
    n.c = at(a).c;
    n.in = {a, mask};
    return add_node(std::move(n));
}

Graph::Id Graph::pick(Id a, Id ids, int elem) {
    if (at(ids).op != Op::IInput) throw std::logic_error("pick needs an integer input");
    if (elem < 0 || elem >= static_cast<int>(ivals_[at(ids).iv].size()))
        throw std::logic_error("pick element out of range");
    Node n;
    n.op = Op::Pick;
    n.r = 1;
    n.c = 1;
    n.in = {a};
    n.iv = at(ids).iv;
    n.a0 = elem;
    return add_node(std::move(n));
}

Graph::Id Graph::sum(Id a) {
    Node n;
    n.op = Op::Sum;
    n.r = 1;
    n.c = 1;
    n.in = {a};
    return add_node(std::move(n));
}

void Graph::set_input(Id id, const std::vector<double>& values) {
    Node& n = at(id);
    if (n.op != Op::Input) throw std::logic_error("set_input on non-input node");
    if (values.size() != n.v.size()) throw std::logic_error("set_input size mismatch");
    n.v = values;
}

void Graph::set_input_float(Id id, const std::vector<float>& values) {
    Node& n = at(id);
    if (n.op != Op::Input) throw std::logic_error("set_input on non-input node");
    if (values.size() != n.v.size()) throw std::logic_error("set_input size mismatch");
    for (size_t i = 0; i < values.size(); ++i) n.v[i] = static_cast<double>(values[i]);
}

void Graph::set_scalar(Id id, double value) {
    Node& n = at(id);
    if (n.op != Op::Input || n.v.size() != 1) throw std::logic_error("set_scalar needs a 1x1 input");
    n.v[0] = value;
}

void Graph::set_iinput(Id id, const std::vector<int>& values) {
    const Node& n = at(id);
    if (n.op != Op::IInput) throw std::logic_error("set_iinput on non-integer input");
    if (values.size() != ivals_[n.iv].size()) throw std::logic_error("set_iinput size mismatch");
    ivals_[n.iv] = values;
}

int Graph::rows(Id id) const { return at(id).r; }
int Graph::cols(Id id) const { return at(id).c; }

const std::vector<double>& Graph::values(Id id) const {
    const Node& n = at(id);
    return n.pt ? n.pt->v : n.v;
}

double Graph::scalar(Id id) const { return values(id)[0]; }

int Graph::op_count() const {
    int c = 0;
    for (const Node& n : nodes_)
        if (n.op != Op::Input && n.op != Op::IInput && n.op != Op::Param) ++c;
    return c;
}

void Graph::forward_node(Node& n) {
    const size_t sz = static_cast<size_t>(n.r) * n.c;
    switch (n.op) {
        case Op::Input:
        case Op::IInput:
        case Op::Param:
            return;
        case Op::Matmul: {
            Node& a = at(n.in[0]);
            Node& b = at(n.in[1]);
            std::fill(n.v.begin(), n.v.end(), 0.0);
            mm(val(a), val(b), n.v.data(), a.r, a.c, b.c);
            return;
        }
        case Op::MatmulNT: {
            Node& a = at(n.in[0]);
            Node& b = at(n.in[1]);
            std::fill(n.v.begin(), n.v.end(), 0.0);
            mm_nt(val(a), val(b), n.v.data(), a.r, a.c, b.r);
            return;
        }
        case Op::Add: {
            const double* a = val(at(n.in[0]));
            const double* b = val(at(n.in[1]));
            for (size_t i = 0; i < sz; ++i) n.v[i] = a[i] + b[i];
            return;
        }
        case Op::AddRow: {
            const double* a = val(at(n.in[0]));
            const double* r = val(at(n.in[1]));
            for (int i = 0; i < n.r; ++i)
                for (int j = 0; j < n.c; ++j)
                    n.v[static_cast<size_t>(i) * n.c + j] = a[static_cast<size_t>(i) * n.c + j] + r[j];
            return;
        }
        case Op::Mul: {
            const double* a = val(at(n.in[0]));
            const double* b = val(at(n.in[1]));
            for (size_t i = 0; i < sz; ++i) n.v[i] = a[i] * b[i];
            return;
        }
        case Op::Scale: {
            const double* a = val(at(n.in[0]));
            for (size_t i = 0; i < sz; ++i) n.v[i] = a[i] * n.s;
            return;
        }
        case Op::Relu: {
            const double* a = val(at(n.in[0]));
            for (size_t i = 0; i < sz; ++i) n.v[i] = a[i] > 0.0 ? a[i] : 0.0;
            return;
        }
        case Op::SoftmaxRows: {
            const double* a = val(at(n.in[0]));
            for (int i = 0; i < n.r; ++i) {
                const double* x = a + static_cast<size_t>(i) * n.c;
                double* y = n.v.data() + static_cast<size_t>(i) * n.c;
                double mx = x[0];
                for (int j = 1; j < n.c; ++j) mx = std::max(mx, x[j]);
                double tot = 0.0;
                for (int j = 0; j < n.c; ++j) {
                    y[j] = std::exp(x[j] - mx);
                    tot += y[j];
                }
                for (int j = 0; j < n.c; ++j) y[j] /= tot;
            }
            return;
        }
        case Op::LogSoftmaxRows: {
            const double* a = val(at(n.in[0]));
            for (int i = 0; i < n.r; ++i) {
                const double* x = a + static_cast<size_t>(i) * n.c;
                double* y = n.v.data() + static_cast<size_t>(i) * n.c;
                double mx = x[0];
                for (int j = 1; j < n.c; ++j) mx = std::max(mx, x[j]);
                double tot = 0.0;
                for (int j = 0; j < n.c; ++j) tot += std::exp(x[j] - mx);
                const double lse = mx + std::log(tot);
                for (int j = 0; j < n.c; ++j) y[j] = x[j] - lse;
            }
            return;
        }
        case Op::LayerNorm: {
            const double* a = val(at(n.in[0]));
            const double* gn = val(at(n.in[1]));
            const double* bs = val(at(n.in[2]));
            for (int i = 0; i < n.r; ++i) {
                const double* x = a + static_cast<size_t>(i) * n.c;
                double* y = n.v.data() + static_cast<size_t>(i) * n.c;
                double mean = 0.0;
                for (int j = 0; j < n.c; ++j) mean += x[j];
                mean /= n.c;
                double var = 0.0;
                for (int j = 0; j < n.c; ++j) var += (x[j] - mean) * (x[j] - mean);
                var /= n.c;
                const double inv = 1.0 / std::sqrt(var + kLnEps);
                n.aux[static_cast<size_t>(i) * 2] = mean;
                n.aux[static_cast<size_t>(i) * 2 + 1] = inv;
                for (int j = 0; j < n.c; ++j) y[j] = (x[j] - mean) * inv * gn[j] + bs[j];
            }
            return;
        }
        case Op::MeanRows: {
            const Node& a = at(n.in[0]);
            const double* av = val(a);
            std::fill(n.v.begin(), n.v.end(), 0.0);
            for (int i = 0; i < a.r; ++i)
                for (int j = 0; j < a.c; ++j) n.v[j] += av[static_cast<size_t>(i) * a.c + j];
            for (int j = 0; j < n.c; ++j) n.v[j] /= a.r;
            return;
        }
        case Op::ConcatRows: {
            size_t off = 0;
            for (int p : n.in) {
                Node& a = at(p);
                const double* av = val(a);
                const size_t asz = static_cast<size_t>(a.r) * a.c;
                std::copy(av, av + asz, n.v.begin() + off);
                off += asz;
            }
            return;
        }
        case Op::ConcatCols: {
            int coff = 0;
            for (int p : n.in) {
                Node& a = at(p);
                const double* av = val(a);
                for (int i = 0; i < n.r; ++i)
                    for (int j = 0; j < a.c; ++j)
                        n.v[static_cast<size_t>(i) * n.c + coff + j] =
                            av[static_cast<size_t>(i) * a.c + j];
                coff += a.c;
            }
            return;
        }
        case Op::SliceCols: {
            const Node& a = at(n.in[0]);
            const double* av = val(a);
            for (int i = 0; i < n.r; ++i)
                for (int j = 0; j < n.c; ++j)
                    n.v[static_cast<size_t>(i) * n.c + j] =
                        av[static_cast<size_t>(i) * a.c + n.a0 + j];
            return;
        }
        case Op::GatherRows: {
            const Node& t = at(n.in[0]);
            const double* tv = val(t);
            const auto& ids = ivals_[n.iv];
            for (int i = 0; i < n.r; ++i) {
                int id = ids[static_cast<size_t>(i)];
                if (id < 0 || id >= t.r) throw std::out_of_range("gather_rows id out of range");
                std::copy(tv + static_cast<size_t>(id) * n.c, tv + static_cast<size_t>(id + 1) * n.c,
                          n.v.begin() + static_cast<size_t>(i) * n.c);
            }
            return;
        }
        case Op::ScaleRows: {
            const double* a = val(at(n.in[0]));
            const double* m = val(at(n.in[1]));
            for (int i = 0; i < n.r; ++i)
                for (int j = 0; j < n.c; ++j)
                    n.v[static_cast<size_t>(i) * n.c + j] = a[static_cast<size_t>(i) * n.c + j] * m[i];
            return;
        }
        case Op::Pick: {
            const Node& a = at(n.in[0]);
            int idx = ivals_[n.iv][static_cast<size_t>(n.a0)];
            if (idx < 0 || idx >= a.r * a.c) throw std::out_of_range("pick index out of range");
            n.v[0] = val(a)[idx];
            return;
        }
        case Op::Sum: {
            const Node& a = at(n.in[0]);
            const double* av = val(a);
            double s = 0.0;
            const size_t asz = static_cast<size_t>(a.r) * a.c;
            for (size_t i = 0; i < asz; ++i) s += av[i];
            n.v[0] = s;
            return;
        }
    }
}

void Graph::forward() {
    for (Node& n : nodes_) forward_node(n);
    ran_forward_ = true;
}

void Graph::backward_node(Node& n) {
    switch (n.op) {
        case Op::Input:
        case Op::IInput:
        case Op::Param:
            return;
        case Op::Matmul: {
            Node& a = at(n.in[0]);
            Node& b = at(n.in[1]);
            if (a.needs_grad) mm_nt(n.g.data(), val(b), grad(a), a.r, b.c, a.c);
            if (b.needs_grad) mm_tn(val(a), n.g.data(), grad(b), a.r, a.c, b.c);
            return;
        }
        case Op::MatmulNT: {
            Node& a = at(n.in[0]);
            Node& b = at(n.in[1]);
            if (a.needs_grad) mm(n.g.data(), val(b), grad(a), a.r, b.r, a.c);
            if (b.needs_grad) mm_tn(n.g.data(), val(a), grad(b), a.r, b.r, a.c);
            return;
        }
        case Op::Add: {
            for (int s = 0; s < 2; ++s) {
                Node& a = at(n.in[s]);
                if (!a.needs_grad) continue;
                double* ag = grad(a);
                for (size_t i = 0; i < n.g.size(); ++i) ag[i] += n.g[i];
            }
            return;
        }
        case Op::AddRow: {
            Node& a = at(n.in[0]);
            Node& r = at(n.in[1]);
            if (a.needs_grad) {
                double* ag = grad(a);
                for (size_t i = 0; i < n.g.size(); ++i) ag[i] += n.g[i];
            }
            if (r.needs_grad) {
                double* rg = grad(r);
                for (int i = 0; i < n.r; ++i)
                    for (int j = 0; j < n.c; ++j) rg[j] += n.g[static_cast<size_t>(i) * n.c + j];
            }
            return;
        }
        case Op::Mul: {
            Node& a = at(n.in[0]);
            Node& b = at(n.in[1]);
            if (a.needs_grad) {
                double* ag = grad(a);
                const double* bv = val(b);
                for (size_t i = 0; i < n.g.size(); ++i) ag[i] += n.g[i] * bv[i];
            }
            if (b.needs_grad) {
                double* bg = grad(b);
                const double* av = val(a);
                for (size_t i = 0; i < n.g.size(); ++i) bg[i] += n.g[i] * av[i];
            }
            return;
        }
        case Op::Scale: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            for (size_t i = 0; i < n.g.size(); ++i) ag[i] += n.g[i] * n.s;
            return;
        }
        case Op::Relu: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            const double* av = val(a);
            for (size_t i = 0; i < n.g.size(); ++i)
                if (av[i] > 0.0) ag[i] += n.g[i];
            return;
        }
        case Op::SoftmaxRows: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            for (int i = 0; i < n.r; ++i) {
                const double* y = n.v.data() + static_cast<size_t>(i) * n.c;
                const double* gy = n.g.data() + static_cast<size_t>(i) * n.c;
                double dot = 0.0;
                for (int j = 0; j < n.c; ++j) dot += gy[j] * y[j];
                double* ga = ag + static_cast<size_t>(i) * n.c;
                for (int j = 0; j < n.c; ++j) ga[j] += y[j] * (gy[j] - dot);
            }
            return;
        }
        case Op::LogSoftmaxRows: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            for (int i = 0; i < n.r; ++i) {
                const double* y = n.v.data() + static_cast<size_t>(i) * n.c;
                const double* gy = n.g.data() + static_cast<size_t>(i) * n.c;
                double tot = 0.0;
                for (int j = 0; j < n.c; ++j) tot += gy[j];
                double* ga = ag + static_cast<size_t>(i) * n.c;
                for (int j = 0; j < n.c; ++j) ga[j] += gy[j] - std::exp(y[j]) * tot;
            }
            return;
        }
        case Op::LayerNorm: {
            Node& a = at(n.in[0]);
            Node& gn = at(n.in[1]);
            Node& bs = at(n.in[2]);
            const double* av = val(a);
            const double* gv = val(gn);
            for (int i = 0; i < n.r; ++i) {
                const double mean = n.aux[static_cast<size_t>(i) * 2];
                const double inv = n.aux[static_cast<size_t>(i) * 2 + 1];
                const double* x = av + static_cast<size_t>(i) * n.c;
                const double* gy = n.g.data() + static_cast<size_t>(i) * n.c;
                if (gn.needs_grad) {
                    double* gg = grad(gn);
                    for (int j = 0; j < n.c; ++j) gg[j] += gy[j] * (x[j] - mean) * inv;
                }
                if (bs.needs_grad) {
                    double* bg = grad(bs);
                    for (int j = 0; j < n.c; ++j) bg[j] += gy[j];
                }
                if (a.needs_grad) {
                    double m1 = 0.0, m2 = 0.0;
                    for (int j = 0; j < n.c; ++j) {
                        const double xh = (x[j] - mean) * inv;
                        const double dxh = gy[j] * gv[j];
                        m1 += dxh;
                        m2 += dxh * xh;
                    }
                    m1 /= n.c;
                    m2 /= n.c;
                    double* ga = grad(a) + static_cast<size_t>(i) * n.c;
                    for (int j = 0; j < n.c; ++j) {
                        const double xh = (x[j] - mean) * inv;
                        const double dxh = gy[j] * gv[j];
                        ga[j] += inv * (dxh - m1 - xh * m2);
                    }
                }
            }
            return;
        }
        case Op::MeanRows: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            for (int i = 0; i < a.r; ++i)
                for (int j = 0; j < a.c; ++j)
                    ag[static_cast<size_t>(i) * a.c + j] += n.g[j] / a.r;
            return;
        }
        case Op::ConcatRows: {
            size_t off = 0;
            for (int p : n.in) {
                Node& a = at(p);
                const size_t asz = static_cast<size_t>(a.r) * a.c;
                if (a.needs_grad) {
                    double* ag = grad(a);
                    for (size_t i = 0; i < asz; ++i) ag[i] += n.g[off + i];
                }
                off += asz;
            }
            return;
        }
        case Op::ConcatCols: {
            int coff = 0;
            for (int p : n.in) {
                Node& a = at(p);
                if (a.needs_grad) {
                    double* ag = grad(a);
                    for (int i = 0; i < n.r; ++i)
                        for (int j = 0; j < a.c; ++j)
                            ag[static_cast<size_t>(i) * a.c + j] +=
                                n.g[static_cast<size_t>(i) * n.c + coff + j];
                }
                coff += a.c;
            }
            return;
        }
        case Op::SliceCols: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            for (int i = 0; i < n.r; ++i)
                for (int j = 0; j < n.c; ++j)
                    ag[static_cast<size_t>(i) * a.c + n.a0 + j] +=
                        n.g[static_cast<size_t>(i) * n.c + j];
            return;
        }
        case Op::GatherRows: {
            Node& t = at(n.in[0]);
            if (!t.needs_grad) return;
            double* tg = grad(t);
            const auto& ids = ivals_[n.iv];
            for (int i = 0; i < n.r; ++i) {
                const int id = ids[static_cast<size_t>(i)];
                for (int j = 0; j < n.c; ++j)
                    tg[static_cast<size_t>(id) * n.c + j] += n.g[static_cast<size_t>(i) * n.c + j];
            }
            return;
        }
        case Op::ScaleRows: {
            Node& a = at(n.in[0]);
            Node& m = at(n.in[1]);
            const double* mv = val(m);
            if (a.needs_grad) {
                double* ag = grad(a);
                for (int i = 0; i < n.r; ++i)
                    for (int j = 0; j < n.c; ++j)
                        ag[static_cast<size_t>(i) * n.c + j] +=
                            n.g[static_cast<size_t>(i) * n.c + j] * mv[i];
            }
            if (m.needs_grad) {
                double* mg = grad(m);
                const double* av = val(a);
                for (int i = 0; i < n.r; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < n.c; ++j)
                        s += n.g[static_cast<size_t>(i) * n.c + j] *
                             av[static_cast<size_t>(i) * n.c + j];
                    mg[i] += s;
                }
            }
            return;
        }
        case Op::Pick: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            grad(a)[ivals_[n.iv][static_cast<size_t>(n.a0)]] += n.g[0];
            return;
        }
        case Op::Sum: {
            Node& a = at(n.in[0]);
            if (!a.needs_grad) return;
            double* ag = grad(a);
            const size_t asz = static_cast<size_t>(a.r) * a.c;
            for (size_t i = 0; i < asz; ++i) ag[i] += n.g[0];
            return;
        }
    }
}

void Graph::backward(Id loss) {
    if (!ran_forward_) throw std::logic_error("backward before forward");
    Node& ln = at(loss);
    if (ln.r != 1 || ln.c != 1) throw std::logic_error("backward target must be scalar");
    for (Node& n : nodes_)
        if (n.op != Op::Param) std::fill(n.g.begin(), n.g.end(), 0.0);
    ln.g[0] = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.needs_grad) backward_node(n);
    }
}

}  // namespace linkforge::nn
