"""Solver symbol naming conventions.

All proof obligations share one flat namespace, so every generated
symbol follows a fixed scheme (documented in docs/symbols.md):

  classical variable x at version w      ->  x_v{w}
  amplitude i of state generation t      ->  sv{t}_{i}_re / sv{t}_{i}_im
  outcome probability of measuring x     ->  pr_{x}_v{w}_{i}
  measured value of x                    ->  meas_{x}
  amplitude square root witness          ->  sq_{x}_v{w}_{i}
  oracle table cell f at input value v   ->  f_{v}
  declared specification variable        ->  its declared name
  function return value                  ->  {function}_ret
  square root of one half                ->  invsqrt2
"""

from __future__ import annotations


def classical(var: str, version: int) -> str:
    return f"{var}_v{version}"


def amplitude(generation: int, index: int, part: str) -> str:
    assert part in ("re", "im")
    return f"sv{generation}_{index}_{part}"


def probability(var: str, version: int, outcome: int) -> str:
    return f"pr_{var}_v{version}_{outcome}"


def measured(var: str) -> str:
    return f"meas_{var}"


def sqrt_witness(var: str, version: int, outcome: int) -> str:
    return f"sq_{var}_v{version}_{outcome}"


def oracle_cell(oracle: str, value: int) -> str:
    return f"{oracle}_{value}"


def return_value(function: str) -> str:
    return f"{function}_ret"


INVSQRT2 = "invsqrt2"
