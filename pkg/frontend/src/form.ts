/** New-game form model: validation happens here, before anything is POSTed. */

export type Mode = "clique" | "factor";

export interface FormInput {
  mode: Mode;
  n: number;
  l: number;
  seed: number;
}

export interface CreateRequest {
  n: number;
  goal: string;
  waiter: string;
  seed: number;
}

export const CLIQUE_MAX_N = 31;
export const CLIQUE_MAX_L = 5;
export const FACTOR_N = 6;
export const FACTOR_K = 3;

export function defaultForm(): FormInput {
  return { mode: "clique", n: 15, l: 4, seed: 0 };
}

/** Empty list means the form may be submitted. */
export function validateForm(input: FormInput): string[] {
  const errors: string[] = [];
  if (!Number.isInteger(input.seed) || input.seed < 0) {
    errors.push("seed must be a non-negative integer");
  }
  if (input.mode === "factor") {
    // the factor table is fixed: a K_3-factor on 6 vertices vs. the exact solver
    return errors;
  }
  if (!Number.isInteger(input.n) || input.n < 3) {
    errors.push("n must be an integer of at least 3");
    return errors;
  }
  if (!Number.isInteger(input.l) || input.l < 2) {
    errors.push("l must be an integer of at least 2");
    return errors;
  }
  const needed = 2 ** input.l - 1;
  if (needed > input.n) {
    errors.push(`building a K_${input.l} needs ${needed} vertices, the board has only ${input.n}`);
  }
  if (input.n > CLIQUE_MAX_N) {
    errors.push(`boards above ${CLIQUE_MAX_N} vertices are not playable here`);
  }
  if (input.l > CLIQUE_MAX_L) {
    errors.push(`goals above K_${CLIQUE_MAX_L} are not playable here`);
  }
  return errors;
}

export function toCreateRequest(input: FormInput): CreateRequest {
  const errors = validateForm(input);
  if (errors.length) {
    throw new Error(errors[0]);
  }
  if (input.mode === "factor") {
    return { n: FACTOR_N, goal: `factor:${FACTOR_K}`, waiter: "solver_optimal", seed: input.seed };
  }
  return { n: input.n, goal: `clique:${input.l}`, waiter: "clique_builder", seed: input.seed };
}
