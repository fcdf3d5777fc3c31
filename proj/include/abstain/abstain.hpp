#ifndef ABSTAIN_ABSTAIN_HPP
#define ABSTAIN_ABSTAIN_HPP

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/estimation.hpp>
#include <abstain/frontier.hpp>
#include <abstain/io.hpp>
#include <abstain/losses.hpp>
#include <abstain/numeric.hpp>
#include <abstain/objective.hpp>
#include <abstain/oracle.hpp>
#include <abstain/potentials.hpp>
#include <abstain/predictor.hpp>
#include <abstain/random.hpp>
#include <abstain/solver.hpp>
#include <abstain/specialists.hpp>
#include <abstain/synthetic.hpp>
#include <abstain/validate.hpp>

#endif // ABSTAIN_ABSTAIN_HPP
