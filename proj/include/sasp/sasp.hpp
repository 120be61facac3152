#pragma once

#include "sasp/analysis.hpp"
#include "sasp/constraints.hpp"
#include "sasp/error.hpp"
#include "sasp/format.hpp"
#include "sasp/oracle.hpp"
#include "sasp/parser.hpp"
#include "sasp/print.hpp"
#include "sasp/rational.hpp"
#include "sasp/solver.hpp"
#include "sasp/term.hpp"
#include "sasp/transform.hpp"
