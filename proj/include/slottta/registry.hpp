#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "slottta/tensor.hpp"

namespace slottta {

enum class ParamTag { encoder, slot_attention, decoder, norm, slot_embeddings };

inline const char* to_string(ParamTag t) {
  switch (t) {
    case ParamTag::encoder: return "encoder";
    case ParamTag::slot_attention: return "slot_attention";
    case ParamTag::decoder: return "decoder";
    case ParamTag::norm: return "norm";
    case ParamTag::slot_embeddings: return "slot_embeddings";
  }
  return "?";
}

inline ParamTag tag_from_string(const std::string& s) {
  if (s == "encoder") return ParamTag::encoder;
  if (s == "slot_attention") return ParamTag::slot_attention;
  if (s == "decoder") return ParamTag::decoder;
  if (s == "norm") return ParamTag::norm;
  if (s == "slot_embeddings") return ParamTag::slot_embeddings;
  throw InputError("unknown parameter tag '" + s + "'");
}

// Ordered, named set of learnable tensors. Order is insertion order and is
// part of the contract: gradient reduction and checkpoint layout follow it.
template <typename T>
class ParamRegistry {
 public:
  struct Entry {
    std::string name;
    ParamTag tag;
    Tensor<T> tensor;
  };

  void add(std::string name, ParamTag tag, Tensor<T> t) {
    if (index_.count(name)) throw ContractError("param registry: duplicate name '" + name + "'");
    t.requires_grad = true;
    index_[name] = entries_.size();
    entries_.push_back(Entry{std::move(name), tag, std::move(t)});
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Entry& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("param registry: unknown name '" + name + "'");
    return entries_[it->second];
  }
  const Entry& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("param registry: unknown name '" + name + "'");
    return entries_[it->second];
  }

  Tensor<T>& tensor(const std::string& name) { return at(name).tensor; }
  const Tensor<T>& tensor(const std::string& name) const { return at(name).tensor; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  // Names carrying any of the given tags, in registry order.
  std::vector<std::string> select(const std::set<ParamTag>& tags) const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (tags.count(e.tag)) out.push_back(e.name);
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
  }

  int64_t total_numel() const {
    int64_t n = 0;
    for (const auto& e : entries_) n += e.tensor.numel();
    return n;
  }

  void alloc_grads() {
    for (auto& e : entries_) e.tensor.alloc_grad();
  }
  void zero_grads() {
    for (auto& e : entries_) e.tensor.zero_grad();
  }

  ParamRegistry clone() const { return *this; }

  template <typename U>
  ParamRegistry<U> cast() const {
    ParamRegistry<U> out;
    for (const auto& e : entries_) {
      Tensor<U> t = e.tensor.template cast<U>();
      t.grad.clear();
      out.add(e.name, e.tag, std::move(t));
    }
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

}  // namespace slottta
