#pragma once

#include "mmv/syntax.hpp"
#include "mmv/typing.hpp"
#include "mmv/interpreter.hpp"
#include "mmv/logic.hpp"
#include "mmv/semantics.hpp"
#include "mmv/contract.hpp"
#include "mmv/parser.hpp"
#include "mmv/verifier.hpp"
#include "mmv/smt.hpp"
#include "mmv/generate.hpp"
#include "mmv/driver.hpp"
