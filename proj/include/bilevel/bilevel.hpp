#pragma once

#include "bilevel/continuation.hpp"
#include "bilevel/diagnostics.hpp"
#include "bilevel/expression.hpp"
#include "bilevel/lower_solver.hpp"
#include "bilevel/model.hpp"
#include "bilevel/oracle.hpp"
#include "bilevel/polyhedral.hpp"
#include "bilevel/problem_io.hpp"
#include "bilevel/registry.hpp"
#include "bilevel/report_io.hpp"
#include "bilevel/selection.hpp"
#include "bilevel/upper_solver.hpp"
#include "bilevel/validation.hpp"
