#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace hdpca {

/// Estimator tags. `Pop` marks the population matrix itself.
enum class Method { Pop, Mle, LedoitWolf, Pdc, Spdc, Lspdc, MaxPdc, Rpdc };

/// Fixed method order; also the ranking tie-break order.
inline constexpr std::array<Method, 7> kEstimatorMethods = {
    Method::Mle,  Method::LedoitWolf, Method::Pdc,   Method::Spdc,
    Method::Lspdc, Method::MaxPdc,    Method::Rpdc};

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::Pop: return "POP";
    case Method::Mle: return "MLE";
    case Method::LedoitWolf: return "LW";
    case Method::Pdc: return "PDC";
    case Method::Spdc: return "SPDC";
    case Method::Lspdc: return "LSPDC";
    case Method::MaxPdc: return "MAXPDC";
    case Method::Rpdc: return "RPDC";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::Pop, Method::Mle, Method::LedoitWolf, Method::Pdc, Method::Spdc,
                   Method::Lspdc, Method::MaxPdc, Method::Rpdc}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

constexpr bool is_pdc_family(Method m) {
  return m == Method::Pdc || m == Method::Spdc || m == Method::Lspdc || m == Method::MaxPdc ||
         m == Method::Rpdc;
}

/// Position in kEstimatorMethods; POP sorts first.
constexpr int method_rank(Method m) {
  if (m == Method::Pop) return -1;
  for (std::size_t i = 0; i < kEstimatorMethods.size(); ++i) {
    if (kEstimatorMethods[i] == m) return static_cast<int>(i);
  }
  return static_cast<int>(kEstimatorMethods.size());
}

enum class ScalerKind { None, Standardize, Local, MaxAbs, Range };

/// Axis over which a scaler statistic is pooled.
///  - PerDimension: one statistic per column.
///  - GlobalScalar: one statistic over every entry.
///  - PerPair: the statistic of the single difference row being scaled
///    (for Local: one scalar variance per observation).
enum class ScalerScope { PerDimension, GlobalScalar, PerPair };

struct ScalerSpec {
  ScalerKind kind = ScalerKind::None;
  ScalerScope scope = ScalerScope::PerDimension;
  double epsilon_floor = 1e-12;
};

constexpr std::string_view to_string(ScalerKind k) {
  switch (k) {
    case ScalerKind::None: return "NONE";
    case ScalerKind::Standardize: return "STANDARDIZE";
    case ScalerKind::Local: return "LOCAL";
    case ScalerKind::MaxAbs: return "MAXABS";
    case ScalerKind::Range: return "RANGE";
  }
  return "?";
}

constexpr std::string_view to_string(ScalerScope s) {
  switch (s) {
    case ScalerScope::PerDimension: return "PER_DIMENSION";
    case ScalerScope::GlobalScalar: return "GLOBAL_SCALAR";
    case ScalerScope::PerPair: return "PER_PAIR";
  }
  return "?";
}

inline std::optional<ScalerScope> parse_scaler_scope(std::string_view s) {
  for (ScalerScope v : {ScalerScope::PerDimension, ScalerScope::GlobalScalar, ScalerScope::PerPair}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

/// Scaler implied by a PDC-family method, with its default scope.
constexpr ScalerSpec default_scaler(Method m) {
  switch (m) {
    case Method::Spdc: return {ScalerKind::Standardize, ScalerScope::PerDimension};
    case Method::Lspdc: return {ScalerKind::Local, ScalerScope::PerDimension};
    case Method::MaxPdc: return {ScalerKind::MaxAbs, ScalerScope::GlobalScalar};
    case Method::Rpdc: return {ScalerKind::Range, ScalerScope::PerDimension};
    default: return {};
  }
}

/// Normalising constant applied to the accumulated pair-product matrix.
///  - Eq1: 2 / (n^2 (n-1)).
///  - Listing: 1 / (n * num_pairs), num_pairs counted from the enumerated plan.
enum class PdcNormalization { Eq1, Listing };

constexpr std::string_view to_string(PdcNormalization v) {
  return v == PdcNormalization::Eq1 ? "EQ1" : "LISTING";
}

}  // namespace hdpca
