#pragma once

#include <stdexcept>
#include <string>

namespace lenmc {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Network-level failure (connect/timeout) talking to a provider.
struct TransportError : Error {
  using Error::Error;
};

// Provider rejected the request (4xx other than 429).
struct ProviderError : Error {
  using Error::Error;
};

// Retry budget spent without a successful completion.
struct BudgetExhausted : Error {
  using Error::Error;
};

// Provider response did not contain assistant content.
struct MalformedResponse : Error {
  using Error::Error;
};

// Judge output could not be parsed into a verdict.
struct UnparseableVerdict : Error {
  using Error::Error;
};

// Judge retries exhausted without a parseable verdict.
struct JudgeFailure : Error {
  using Error::Error;
};

// One-shot summarization prompt requested without a demo triple.
struct MissingDemo : Error {
  using Error::Error;
};

// A proposal was requested from a state that already satisfies the constraint.
struct AlreadySatisfied : Error {
  using Error::Error;
};

// Mock provider could not classify an incoming conversation.
struct UnclassifiableConversation : Error {
  using Error::Error;
};

// Dataset line failed validation.
struct MalformedRecord : Error {
  using Error::Error;
};

// Two dataset records share an id.
struct DuplicateId : Error {
  using Error::Error;
};

// Results file line failed validation.
struct MalformedTrace : Error {
  using Error::Error;
};

// Metric requested over an empty collection.
struct EmptyInput : Error {
  using Error::Error;
};

// Contract violation inside the sampler (e.g. proposing from a satisfied state).
struct InvalidState : Error {
  using Error::Error;
};

}  // namespace lenmc
