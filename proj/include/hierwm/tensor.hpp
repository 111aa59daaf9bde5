#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hierwm {

// Dense row-major tensor of doubles. Shape is dynamic; all math lives in
// kernels.hpp / tape.hpp, this type only owns storage.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(count(shape), 0.0) {}
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != count(shape))
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    static std::int64_t count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, double v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }

    double& operator[](std::int64_t i) { return data[static_cast<size_t>(i)]; }
    double operator[](std::int64_t i) const { return data[static_cast<size_t>(i)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    Tensor reshaped(std::vector<int> s) const {
        if (count(s) != size()) throw std::invalid_argument("Tensor: reshape size mismatch");
        Tensor t;
        t.shape = std::move(s);
        t.data = data;
        return t;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    for (std::int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// Ordered name -> tensor container. Iteration order is insertion order so
// that optimizer updates, checkpoints and digests are deterministic.
class TensorMap {
public:
    struct Entry {
        std::string name;
        Tensor tensor;
    };

    void add(std::string name, Tensor t) {
        if (find(name) >= 0) throw std::invalid_argument("TensorMap: duplicate name " + name);
        entries_.push_back({std::move(name), std::move(t)});
    }

    int find(const std::string& name) const {
        for (size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    bool contains(const std::string& name) const { return find(name) >= 0; }

    Tensor& at(const std::string& name) {
        int i = find(name);
        if (i < 0) throw std::out_of_range("TensorMap: no tensor named " + name);
        return entries_[static_cast<size_t>(i)].tensor;
    }
    const Tensor& at(const std::string& name) const {
        int i = find(name);
        if (i < 0) throw std::out_of_range("TensorMap: no tensor named " + name);
        return entries_[static_cast<size_t>(i)].tensor;
    }

    size_t size() const { return entries_.size(); }
    Entry& entry(size_t i) { return entries_[i]; }
    const Entry& entry(size_t i) const { return entries_[i]; }

    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }

    // Same names and shapes, all entries zeroed.
    TensorMap zeros_like() const {
        TensorMap z;
        for (const auto& e : entries_) z.add(e.name, Tensor::zeros(e.tensor.shape));
        return z;
    }

    std::int64_t total_elements() const {
        std::int64_t n = 0;
        for (const auto& e : entries_) n += e.tensor.size();
        return n;
    }

private:
    std::vector<Entry> entries_;
};

inline bool bitwise_equal(const TensorMap& a, const TensorMap& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a.entry(i).name != b.entry(i).name) return false;
        if (!bitwise_equal(a.entry(i).tensor, b.entry(i).tensor)) return false;
    }
    return true;
}

}  // namespace hierwm
