#pragma once

#include "sheetsmith/confidence.hpp"
#include "sheetsmith/csv.hpp"
#include "sheetsmith/error.hpp"
#include "sheetsmith/evaluator.hpp"
#include "sheetsmith/formula.hpp"
#include "sheetsmith/metrics.hpp"
#include "sheetsmith/report.hpp"
#include "sheetsmith/synth.hpp"
