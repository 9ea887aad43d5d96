// Pure view-model builders: what the DOM layer renders, testable without it.

import { FaqItem, Slot } from "./api.js";
import { ConsoleState } from "./store.js";

export interface CardView {
  slot: number;
  theme: string;
  percent: number;
  empty: boolean;
  expanded: FaqItem | null;
}

/** At most two suggestion cards, one per visible slot. */
export function cardViews(state: ConsoleState): CardView[] {
  const slots: Slot[] = state.slots.slice(0, 2);
  while (slots.length < 2) slots.push(null);
  return slots.map((slot, index) => ({
    slot: index,
    theme: slot ? slot.theme : "",
    percent: slot ? slot.percent : 0,
    empty: slot === null,
    expanded: state.expanded[index] ?? null,
  }));
}

export function counterLabel(state: ConsoleState): string {
  return state.counter > 0 ? `+${state.counter}` : `${state.counter}`;
}

export function projectsVisible(state: ConsoleState): boolean {
  return state.projects.length > 0;
}
