// Console state and actions. The store holds no ranking logic: every state
// change flows through the service API, and the rendered counter always
// mirrors the last server-acknowledged value. Mutations are queued so at
// most one is in flight per session.

import {
  ApiClient,
  FaqItem,
  Project,
  Role,
  Slot,
  Suggestion,
} from "./api.js";

export interface ChatMessage {
  sender: string;
  text: string;
  role: Role;
}

export interface ConsoleState {
  sessionId: string | null;
  messages: ChatMessage[];
  inputText: string;
  slots: Slot[];
  expanded: (FaqItem | null)[];
  counter: number;
  aiSupport: boolean;
  learningBehavior: boolean;
  introVisible: boolean;
  feedbackQuery: string;
  feedbackSelected: number | null;
  feedbackConfirmed: boolean;
  projects: Project[];
  faqs: FaqItem[];
  error: string | null;
}

export interface KeyValueStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const INTRO_KEY = "faqassist.intro.dismissed";

function initialState(): ConsoleState {
  return {
    sessionId: null,
    messages: [],
    inputText: "",
    slots: [null, null],
    expanded: [null, null],
    counter: 0,
    aiSupport: true,
    learningBehavior: false,
    introVisible: true,
    feedbackQuery: "",
    feedbackSelected: null,
    feedbackConfirmed: false,
    projects: [],
    faqs: [],
    error: null,
  };
}

/** Case-insensitive substring filter over FAQ themes and questions. */
export function filterFaqs(query: string, faqs: FaqItem[]): FaqItem[] {
  const needle = query.trim().toLowerCase();
  if (!needle) return [];
  return faqs.filter(
    (faq) =>
      faq.theme.toLowerCase().includes(needle) ||
      faq.question.toLowerCase().includes(needle),
  );
}

export class ConsoleStore {
  state: ConsoleState = initialState();
  private queue: Promise<unknown> = Promise.resolve();
  private listeners: Array<(state: ConsoleState) => void> = [];

  constructor(
    private api: ApiClient,
    private storage: KeyValueStorage | null = null,
  ) {}

  onChange(listener: (state: ConsoleState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Serialize mutations: at most one API call in flight per session. */
  private enqueue<T>(action: () => Promise<T>): Promise<T> {
    const next = this.queue.then(action, action);
    this.queue = next.catch(() => undefined);
    return next;
  }

  async init(faqs: FaqItem[] = []): Promise<void> {
    this.state.faqs = faqs;
    this.state.introVisible = this.storage?.getItem(INTRO_KEY) !== "1";
    this.state.sessionId = await this.api.createSession();
    this.notify();
  }

  dismissIntro(): void {
    this.state.introVisible = false;
    this.storage?.setItem(INTRO_KEY, "1");
    this.notify();
  }

  setInputText(text: string): void {
    this.state.inputText = text;
    this.notify();
  }

  private requireSession(): string {
    if (!this.state.sessionId) throw new Error("no session yet");
    return this.state.sessionId;
  }

  /** Post one utterance; the service answers with fresh suggestion slots. */
  postUtterance(sender: string, text: string, role: Role): Promise<void> {
    return this.enqueue(async () => {
      const sessionId = this.requireSession();
      try {
        const response = await this.api.postUtterance(sessionId, sender, text, role);
        this.state.messages.push({ sender, text, role });
        this.state.slots = response.slots;
        this.state.expanded = [null, null];
        this.state.error = null;
        this.state.projects = await this.api.projects(sessionId);
      } catch (err) {
        this.state.error = String(err);
      }
      this.notify();
    });
  }

  /** Send the agent's input field content into the chat (edits allowed). */
  sendAgentMessage(sender = "Mitarbeiter"): Promise<void> {
    const text = this.state.inputText.trim();
    if (!text) return Promise.resolve();
    this.state.inputText = "";
    return this.postUtterance(sender, text, "agent");
  }

  copyToChat(slot: number): Promise<void> {
    return this.enqueue(async () => {
      try {
        const response = await this.api.copyToChat(this.requireSession(), slot);
        this.state.inputText += response.answer_text;
        this.state.counter = response.counter;
        this.state.error = null;
      } catch (err) {
        this.state.error = String(err);
      }
      this.notify();
    });
  }

  discard(slot: number): Promise<void> {
    return this.enqueue(async () => {
      try {
        const response = await this.api.discard(this.requireSession(), slot);
        this.state.slots = response.slots;
        this.state.expanded[slot] = null;
        this.state.counter = response.counter;
        this.state.error = null;
      } catch (err) {
        this.state.error = String(err);
      }
      this.notify();
    });
  }

  toggleMoreInfo(slot: number): Promise<void> {
    return this.enqueue(async () => {
      if (this.state.expanded[slot]) {
        this.state.expanded[slot] = null;
        this.notify();
        return;
      }
      try {
        this.state.expanded[slot] = await this.api.getMoreInfo(
          this.requireSession(),
          slot,
        );
        this.state.error = null;
      } catch (err) {
        this.state.error = String(err);
      }
      this.notify();
    });
  }

  setFeedbackQuery(query: string): void {
    this.state.feedbackQuery = query;
    this.state.feedbackSelected = null;
    this.state.feedbackConfirmed = false;
    this.notify();
  }

  feedbackResults(): FaqItem[] {
    return filterFaqs(this.state.feedbackQuery, this.state.faqs);
  }

  selectFeedback(faqId: number): void {
    this.state.feedbackSelected = faqId;
    this.notify();
  }

  submitFeedback(): Promise<void> {
    return this.enqueue(async () => {
      const selected = this.state.feedbackSelected;
      if (selected === null || !this.state.feedbackQuery.trim()) return;
      try {
        await this.api.submitFeedback(
          this.requireSession(),
          this.state.feedbackQuery,
          selected,
        );
        // success clears the form and confirms
        this.state.feedbackQuery = "";
        this.state.feedbackSelected = null;
        this.state.feedbackConfirmed = true;
        this.state.error = null;
      } catch (err) {
        // keep the form state for retry
        this.state.error = String(err);
      }
      this.notify();
    });
  }

  updateSettings(aiSupport: boolean, learningBehavior: boolean): Promise<void> {
    return this.enqueue(async () => {
      try {
        await this.api.updateSettings(this.requireSession(), aiSupport, learningBehavior);
        this.state.aiSupport = aiSupport;
        this.state.learningBehavior = learningBehavior;
        this.state.error = null;
      } catch (err) {
        this.state.error = String(err);
      }
      this.notify();
    });
  }
}

export type { FaqItem, Project, Slot, Suggestion };
