#pragma once

#include <stdexcept>
#include <string>

namespace evacnet {

// Every error raised by the toolkit derives from Error so callers can catch
// the whole family in one place (the CLI maps them onto exit codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EVACNET_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// plan
EVACNET_DEFINE_ERROR(ParseError);
EVACNET_DEFINE_ERROR(ValidationError);

// grid
EVACNET_DEFINE_ERROR(NoFeasibleSize);
EVACNET_DEFINE_ERROR(DisconnectedPlan);

// lp
EVACNET_DEFINE_ERROR(NodeLimitExceeded);

// evac
EVACNET_DEFINE_ERROR(ConfigError);
EVACNET_DEFINE_ERROR(SolverError);
EVACNET_DEFINE_ERROR(Unevacuable);
EVACNET_DEFINE_ERROR(HorizonCapExceeded);
EVACNET_DEFINE_ERROR(NonProgress);

// abss
EVACNET_DEFINE_ERROR(Overcrowded);
EVACNET_DEFINE_ERROR(NoRoute);
EVACNET_DEFINE_ERROR(TimeCapExceeded);
EVACNET_DEFINE_ERROR(WallTooShort);

// qn
EVACNET_DEFINE_ERROR(RangeError);

// cli
EVACNET_DEFINE_ERROR(SlotMismatch);

#undef EVACNET_DEFINE_ERROR

}  // namespace evacnet
