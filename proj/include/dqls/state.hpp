#pragma once

#include "dqls/numeric.hpp"

#include <functional>
#include <map>
#include <span>
#include <utility>

namespace dqls {

// Registers are stored little-endian: the first register occupies the lowest bits.
class RegisterLayout {
 public:
  RegisterLayout() = default;
  RegisterLayout(std::initializer_list<std::pair<std::string, int>> regs) {
    for (auto& r : regs) add(r.first, r.second);
  }

  void add(const std::string& name, int width) {
    if (width < 1) throw LayoutError("register width must be >= 1: " + name);
    if (index_.count(name)) throw LayoutError("duplicate register: " + name);
    index_[name] = regs_.size();
    regs_.push_back({name, width, total_});
    total_ += width;
  }

  int total() const { return total_; }
  std::size_t dim() const { return std::size_t{1} << total_; }
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  int width(const std::string& name) const { return reg(name).width; }
  int offset(const std::string& name) const { return reg(name).offset; }
  std::size_t count() const { return regs_.size(); }
  const std::string& name(std::size_t i) const { return regs_.at(i).name; }

 private:
  struct Reg {
    std::string name;
    int width;
    int offset;
  };
  const Reg& reg(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LayoutError("unknown register: " + name);
    return regs_[it->second];
  }
  std::vector<Reg> regs_;
  std::map<std::string, std::size_t> index_;
  int total_ = 0;
};

struct Control {
  std::string reg;
  std::size_t pattern;
};

// Slices whose squared norm is below this are skipped by kernels. Keeps sparse
// clock/flag patterns cheap without changing results beyond roundoff.
inline constexpr double kSliceSkip = 1e-30;

class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(RegisterLayout layout)
      : layout_(std::move(layout)), amp_(Vec::Zero(static_cast<Eigen::Index>(layout_.dim()))) {
    amp_(0) = 1.0;
  }

  const RegisterLayout& layout() const { return layout_; }
  const Vec& amplitudes() const { return amp_; }
  Vec& amplitudes() { return amp_; }
  double norm() const { return amp_.norm(); }
  bool unnormalized = false;

  // Place a vector on one register, all others |0>.
  static StateVector with_register(RegisterLayout layout, const std::string& reg, const Vec& v) {
    StateVector s(std::move(layout));
    const auto w = s.layout_.width(reg);
    if (v.size() > (Eigen::Index{1} << w)) throw LayoutError("vector larger than register " + reg);
    s.amp_.setZero();
    const int off = s.layout_.offset(reg);
    for (Eigen::Index i = 0; i < v.size(); ++i) s.amp_(static_cast<Eigen::Index>(std::size_t(i) << off)) = v(i);
    return s;
  }

  std::size_t reg_value(std::size_t basis, const std::string& reg) const {
    const int off = layout_.offset(reg), w = layout_.width(reg);
    return (basis >> off) & ((std::size_t{1} << w) - 1);
  }

  // Visit every assignment of the non-target qubits that satisfies the controls,
  // gather the 2^t target amplitudes (first target lowest), run the kernel, scatter.
  void apply_kernel(const std::vector<std::string>& targets, const std::vector<Control>& controls,
                    const std::function<void(Vec&)>& kernel) {
    std::vector<int> tbits;
    for (auto& t : targets) {
      const int off = layout_.offset(t), w = layout_.width(t);
      for (int b = 0; b < w; ++b) tbits.push_back(off + b);
    }
    std::size_t cmask = 0, cval = 0;
    for (auto& c : controls) {
      const int off = layout_.offset(c.reg), w = layout_.width(c.reg);
      if (c.pattern >> w) throw LayoutError("control pattern too wide for " + c.reg);
      const std::size_t m = ((std::size_t{1} << w) - 1) << off;
      if (cmask & m) throw LayoutError("register used twice in controls: " + c.reg);
      cmask |= m;
      cval |= c.pattern << off;
    }
    std::size_t tmask = 0;
    for (int b : tbits) tmask |= std::size_t{1} << b;
    if (tmask & cmask) throw LayoutError("register is both target and control");

    const std::size_t tdim = std::size_t{1} << tbits.size();
    std::vector<std::size_t> offs(tdim, 0);
    for (std::size_t j = 0; j < tdim; ++j)
      for (std::size_t b = 0; b < tbits.size(); ++b)
        if ((j >> b) & 1) offs[j] |= std::size_t{1} << tbits[b];

    const std::size_t free_mask = (layout_.dim() - 1) & ~tmask & ~cmask;
    Vec buf(static_cast<Eigen::Index>(tdim));
    // Enumerate submasks of free_mask.
    std::size_t sub = 0;
    while (true) {
      const std::size_t base = sub | cval;
      double n2 = 0;
      for (std::size_t j = 0; j < tdim; ++j) {
        buf(j) = amp_(static_cast<Eigen::Index>(base | offs[j]));
        n2 += std::norm(buf(j));
      }
      if (n2 > kSliceSkip) {
        kernel(buf);
        for (std::size_t j = 0; j < tdim; ++j) amp_(static_cast<Eigen::Index>(base | offs[j])) = buf(j);
      }
      if (sub == free_mask) break;
      sub = (sub - free_mask) & free_mask;
    }
  }

  void apply_operator(const Mat& u, const std::vector<std::string>& targets,
                      const std::vector<Control>& controls = {}) {
    std::size_t w = 0;
    for (auto& t : targets) w += layout_.width(t);
    const auto d = Eigen::Index{1} << w;
    if (u.rows() != d || u.cols() != d) throw LayoutError("operator dimension does not match targets");
    apply_kernel(targets, controls, [&](Vec& v) { v = u * v; });
  }

  // Weight of basis states where every listed register holds the given value.
  double weight(const std::vector<Control>& sel) const {
    std::size_t mask = 0, val = 0;
    for (auto& c : sel) {
      const int off = layout_.offset(c.reg), w = layout_.width(c.reg);
      mask |= ((std::size_t{1} << w) - 1) << off;
      val |= c.pattern << off;
    }
    double s = 0;
    for (std::size_t i = 0; i < layout_.dim(); ++i)
      if ((i & mask) == val) s += std::norm(amp_(static_cast<Eigen::Index>(i)));
    return s;
  }

  // Zero out everything not matching sel.
  void project(const std::vector<Control>& sel) {
    std::size_t mask = 0, val = 0;
    for (auto& c : sel) {
      const int off = layout_.offset(c.reg), w = layout_.width(c.reg);
      mask |= ((std::size_t{1} << w) - 1) << off;
      val |= c.pattern << off;
    }
    for (std::size_t i = 0; i < layout_.dim(); ++i)
      if ((i & mask) != val) amp_(static_cast<Eigen::Index>(i)) = 0;
    unnormalized = true;
  }

  // Sum of the register's amplitudes over the basis states selected by sel,
  // marginalizing remaining registers coherently (used for clock erasure).
  Vec register_vector(const std::string& reg, const std::vector<Control>& sel) const {
    std::size_t mask = 0, val = 0;
    for (auto& c : sel) {
      const int off = layout_.offset(c.reg), w = layout_.width(c.reg);
      mask |= ((std::size_t{1} << w) - 1) << off;
      val |= c.pattern << off;
    }
    Vec out = Vec::Zero(Eigen::Index{1} << layout_.width(reg));
    for (std::size_t i = 0; i < layout_.dim(); ++i)
      if ((i & mask) == val) out(static_cast<Eigen::Index>(reg_value(i, reg))) += amp_(static_cast<Eigen::Index>(i));
    return out;
  }

 private:
  RegisterLayout layout_;
  Vec amp_;
};

}  // namespace dqls
