#include "kvsopt/errors.hpp"

namespace kvs {

NonFiniteValue::NonFiniteValue(std::vector<double> x, std::size_t sample_index, double value)
    : NumericError("non-finite objective value " + std::to_string(value) + " at sample entry " +
                   std::to_string(sample_index)),
      x_(std::move(x)),
      sample_index_(sample_index),
      value_(value) {}

NonFinitePosition::NonFinitePosition(std::size_t particle, std::size_t iterate)
    : NumericError("non-finite position for particle " + std::to_string(particle) + " at iterate " +
                   std::to_string(iterate)),
      particle_(particle),
      iterate_(iterate) {}

}  // namespace kvs
