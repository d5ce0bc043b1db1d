#pragma once

#include "modtt/checker.hpp"
#include "modtt/coerce.hpp"
#include "modtt/diagnostics.hpp"
#include "modtt/elaborate.hpp"
#include "modtt/equality.hpp"
#include "modtt/nbe.hpp"
#include "modtt/paramtest.hpp"
#include "modtt/phase.hpp"
#include "modtt/print.hpp"
#include "modtt/rewrite_oracle.hpp"
#include "modtt/runtime.hpp"
#include "modtt/syntax.hpp"
