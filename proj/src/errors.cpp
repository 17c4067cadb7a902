#include "tabser/errors.hpp"

namespace tabser {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_column: return "MissingColumn";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::empty_dataset: return "EmptyDataset";
    case ErrorKind::arity_mismatch: return "ArityMismatch";
    case ErrorKind::missing_placeholder: return "MissingPlaceholder";
    case ErrorKind::empty_choices: return "EmptyChoices";
    case ErrorKind::duplicate_choices: return "DuplicateChoices";
    case ErrorKind::single_class: return "SingleClass";
    case ErrorKind::no_eligible_class: return "NoEligibleClass";
    case ErrorKind::missing_class_in_train: return "MissingClassInTrain";
    case ErrorKind::non_convergence: return "NonConvergence";
    case ErrorKind::unknown_sex: return "UnknownSex";
    case ErrorKind::unknown_subject: return "UnknownSubject";
    case ErrorKind::non_finite_score: return "NonFiniteScore";
    case ErrorKind::io_error: return "IoError";
    case ErrorKind::backend_error: return "BackendError";
    case ErrorKind::timeout: return "Timeout";
    case ErrorKind::http_status: return "HttpStatus";
    case ErrorKind::rate_limited: return "RateLimited";
    case ErrorKind::missing_logprobs: return "MissingLogprobs";
    case ErrorKind::usage: return "Usage";
  }
  return "Error";
}

}  // namespace tabser
