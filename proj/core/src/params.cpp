#include "spectrack/params.hpp"

#include "spectrack/error.hpp"

namespace spectrack {

void ParamSet::add(std::string name, Matrix value) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value)});
}

void ParamSet::set(std::string name, Matrix value) {
  if (auto it = index_.find(name); it != index_.end()) {
    entries_[it->second].value = std::move(value);
    return;
  }
  add(std::move(name), std::move(value));
}

bool ParamSet::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

Matrix& ParamSet::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].value;
}

const Matrix& ParamSet::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].value;
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Matrix(e.value.rows(), e.value.cols()));
  return out;
}

Var ParamBinder::operator()(std::string_view name) {
  if (auto it = bound_.find(name); it != bound_.end()) return it->second;
  const Matrix& value = params_.at(name);
  Var v = trainable_ ? tape_.variable(value) : tape_.constant(value);
  bound_.emplace(std::string(name), v);
  return v;
}

ParamSet ParamBinder::gradients() const {
  ParamSet out;
  for (const auto& e : params_) {
    auto it = bound_.find(e.name);
    if (it == bound_.end()) {
      out.add(e.name, Matrix(e.value.rows(), e.value.cols()));
    } else {
      out.add(e.name, tape_.grad(it->second));
    }
  }
  return out;
}

Matrix random_normal(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

}  // namespace spectrack
