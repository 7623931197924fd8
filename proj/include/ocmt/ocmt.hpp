#pragma once

#include <ocmt/basis.hpp>
#include <ocmt/campaign.hpp>
#include <ocmt/csv.hpp>
#include <ocmt/dataset.hpp>
#include <ocmt/dgp.hpp>
#include <ocmt/error.hpp>
#include <ocmt/eval.hpp>
#include <ocmt/glasso.hpp>
#include <ocmt/regress.hpp>
#include <ocmt/report.hpp>
#include <ocmt/rng.hpp>
#include <ocmt/select.hpp>
#include <ocmt/selection.hpp>
