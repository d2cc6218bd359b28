#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/errors.hpp
 *
 * Error codes and the exception type shared by all metacog modules.
 * Every throwing operation reports a stable `errc` so callers (and tests)
 * can branch on the failure kind instead of string-matching messages.
 */

#include <stdexcept>
#include <string>
#include <string_view>

namespace metacog {

enum class errc {
  // generic
  invalid_argument,
  invalid_config,

  // reward arithmetic
  invalid_counts,
  zero_gold_units,
  out_of_range_alignment,
  invalid_flag,

  // group optimization
  group_too_small,
  non_finite_ratio,
  advantages_missing,
  length_mismatch,
  index_out_of_range,

  // grader protocol
  template_field_empty,
  unparseable,
  range_violation,
  missing_field,
  grader_unavailable,
  grader_incoherent,

  // dataset
  file_unreadable,
  empty_task,
  empty_field,
  schema_violation,

  // rollout extraction
  empty_answer,

  // pipeline
  insufficient_data,
  audit_mismatch,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::invalid_config: return "InvalidConfig";
    case errc::invalid_counts: return "InvalidCounts";
    case errc::zero_gold_units: return "ZeroGoldUnits";
    case errc::out_of_range_alignment: return "OutOfRangeAlignment";
    case errc::invalid_flag: return "InvalidFlag";
    case errc::group_too_small: return "GroupTooSmall";
    case errc::non_finite_ratio: return "NonFiniteRatio";
    case errc::advantages_missing: return "AdvantagesMissing";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::template_field_empty: return "TemplateFieldEmpty";
    case errc::unparseable: return "Unparseable";
    case errc::range_violation: return "RangeViolation";
    case errc::missing_field: return "MissingField";
    case errc::grader_unavailable: return "GraderUnavailable";
    case errc::grader_incoherent: return "GraderIncoherent";
    case errc::file_unreadable: return "FileUnreadable";
    case errc::empty_task: return "EmptyTask";
    case errc::empty_field: return "EmptyField";
    case errc::schema_violation: return "SchemaViolation";
    case errc::empty_answer: return "EmptyAnswer";
    case errc::insufficient_data: return "InsufficientData";
    case errc::audit_mismatch: return "AuditMismatch";
  }
  return "Unknown";
}

/**
 * Exception carrying a stable error code, a human-readable message, and an
 * optional field name (used by verdict range checks to say which field
 * violated its bound).
 */
class Error : public std::runtime_error {
 public:
  Error(errc code, std::string message, std::string field = {})
      : std::runtime_error(std::string(errc_name(code)) + ": " + message +
                           (field.empty() ? "" : " (field: " + field + ")")),
        code_(code),
        field_(std::move(field)) {}

  errc code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  errc code_;
  std::string field_;
};

}  // namespace metacog
