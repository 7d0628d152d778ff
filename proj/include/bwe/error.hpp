#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bwe {

// Bad input from the user: unknown words, malformed files, inconsistent
// options. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure inside an algorithm (non-finite values, singular
// systems, divergence). The CLI maps these to exit code 1.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EmptyVocabularyError : public InputError {
public:
  using InputError::InputError;
};

class DimensionMismatchError : public InputError {
public:
  using InputError::InputError;
};

class UnknownWordError : public InputError {
public:
  explicit UnknownWordError(std::string word)
      : InputError("word not in vocabulary: '" + word + "'"),
        word_(std::move(word)) {}
  const std::string &word() const { return word_; }

private:
  std::string word_;
};

class NonFiniteError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class RankDeficiencyError : public InputError {
public:
  RankDeficiencyError(const std::string &what, std::vector<std::string> anchors)
      : InputError(what), anchors_(std::move(anchors)) {}
  const std::vector<std::string> &anchors() const { return anchors_; }

private:
  std::vector<std::string> anchors_;
};

class SingularDesignError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace bwe
