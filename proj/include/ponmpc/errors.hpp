#ifndef PONMPC_ERRORS_HPP
#define PONMPC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ponmpc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleDeadlineError : Error { using Error::Error; };
struct AllocationExceedsQueueError : Error { using Error::Error; };
struct InvalidHurstError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct NegativeArrivalError : Error { using Error::Error; };
struct NonIntegralSolutionError : Error { using Error::Error; };
struct IterationLimitError : Error { using Error::Error; };
struct SearchSpaceTooLargeError : Error { using Error::Error; };
struct MatrixTooLargeError : Error { using Error::Error; };
struct NonTernaryEntryError : Error { using Error::Error; };
struct SlotTooShortError : Error { using Error::Error; };
struct InvalidScenarioError : Error { using Error::Error; };
struct UnknownMetricError : Error { using Error::Error; };
struct InternalError : Error { using Error::Error; };

} // namespace ponmpc

#endif
