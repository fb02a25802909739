#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

namespace dqls {

enum class Primitive { be_A, be_A_bar, b_prep, qsp_query, cks_pe_round };

inline const char* to_string(Primitive p) {
  switch (p) {
    case Primitive::be_A: return "be_A";
    case Primitive::be_A_bar: return "be_A_bar";
    case Primitive::b_prep: return "b_prep";
    case Primitive::qsp_query: return "qsp_query";
    case Primitive::cks_pe_round: return "cks_pe_round";
  }
  return "?";
}

inline constexpr std::array<Primitive, 5> kPrimitives = {
    Primitive::be_A, Primitive::be_A_bar, Primitive::b_prep, Primitive::qsp_query,
    Primitive::cks_pe_round};

struct CostConstants {
  double c_be = 2.0;
  double c_b = 2.0;
};

struct LedgerLine {
  std::uint64_t count = 0;
  double qubits = 0.0;
};

struct LedgerReport {
  std::map<std::string, LedgerLine> lines;
  std::map<std::string, double> tags;  // qubits grouped by caller-supplied tag
  double total = 0.0;
};

// Qubit-communication accounting. Charges are doubles so the configurable
// multipliers need not be integers; every charge is count * per-use.
class CommLedger {
 public:
  CommLedger() = default;
  explicit CommLedger(CostConstants k) : k_(k) {}

  const CostConstants& constants() const { return k_; }

  void charge(Primitive p, std::uint64_t uses, double per_use) {
    auto& l = lines_[static_cast<int>(p)];
    l.count += uses;
    l.qubits += static_cast<double>(uses) * per_use;
    total_ += static_cast<double>(uses) * per_use;
    if (!tag_.empty()) tags_[tag_] += static_cast<double>(uses) * per_use;
  }

  double total() const { return total_; }
  const LedgerLine& line(Primitive p) const { return lines_[static_cast<int>(p)]; }

  // Charges made while a tag is active are also summed under that tag.
  void set_tag(std::string t) { tag_ = std::move(t); }
  const std::string& tag() const { return tag_; }
  double tagged(const std::string& t) const {
    auto it = tags_.find(t);
    return it == tags_.end() ? 0.0 : it->second;
  }

  // Scale everything recorded so far (repeated runs under amplification).
  void repeat(double times) {
    for (auto& l : lines_) {
      l.count = static_cast<std::uint64_t>(static_cast<double>(l.count) * times + 0.5);
      l.qubits *= times;
    }
    for (auto& t : tags_) t.second *= times;
    total_ *= times;
  }

  LedgerReport report() const {
    LedgerReport r;
    for (auto p : kPrimitives) r.lines[to_string(p)] = line(p);
    for (auto& l : r.lines) r.total += l.second.qubits;
    r.tags = tags_;
    return r;
  }

 private:
  CostConstants k_;
  std::array<LedgerLine, 5> lines_{};
  std::map<std::string, double> tags_;
  std::string tag_;
  double total_ = 0.0;
};

// RAII tag scope.
class LedgerTag {
 public:
  LedgerTag(CommLedger* l, std::string t) : l_(l) {
    if (l_) {
      prev_ = l_->tag();
      l_->set_tag(std::move(t));
    }
  }
  ~LedgerTag() {
    if (l_) l_->set_tag(prev_);
  }
  LedgerTag(const LedgerTag&) = delete;
  LedgerTag& operator=(const LedgerTag&) = delete;

 private:
  CommLedger* l_;
  std::string prev_;
};

}  // namespace dqls
