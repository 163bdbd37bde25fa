#pragma once

#include <stdexcept>
#include <string>

namespace rank1lab {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define RANK1LAB_ERROR(Name)                                              \
    struct Name : Error {                                                 \
        explicit Name(const std::string& w) : Error(#Name, w) {}          \
    }

RANK1LAB_ERROR(InvalidSchedule);
RANK1LAB_ERROR(TailBoundUnavailable);
RANK1LAB_ERROR(ScaleOverflow);
RANK1LAB_ERROR(DigitBoundViolated);
RANK1LAB_ERROR(NotUnboundedScale);
RANK1LAB_ERROR(NotBoundedScale);
RANK1LAB_ERROR(PrefixTooShort);
RANK1LAB_ERROR(RemovedCylinder);
RANK1LAB_ERROR(InsufficientPrecision);
RANK1LAB_ERROR(ScheduleTooLarge);
RANK1LAB_ERROR(TailDiverges);
RANK1LAB_ERROR(PreconditionViolated);
RANK1LAB_ERROR(HypothesisFails);
RANK1LAB_ERROR(TargetTooCoarse);
RANK1LAB_ERROR(TargetTooFine);
RANK1LAB_ERROR(DepthMismatch);
RANK1LAB_ERROR(ConfigError);

#undef RANK1LAB_ERROR

}  // namespace rank1lab
