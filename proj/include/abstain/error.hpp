#ifndef ABSTAIN_ERROR_HPP
#define ABSTAIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace abstain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes disagree (matrix vs. vector lengths, model vs. file columns).
class DimensionError : public Error
{
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A scalar parameter lies outside its legal range (cost, radius, delta...).
class DomainError : public Error
{
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Input data violates an invariant (entry out of [-1,1], bad label, bad file).
class DataError : public Error
{
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

/// The adversary's constraint set {z : (1/n) F z >= b} is empty.
class InfeasibleError : public DataError
{
public:
    explicit InfeasibleError(const std::string& what) : DataError(what) {}
};

} // namespace abstain

#endif // ABSTAIN_ERROR_HPP
