// Typed client for the suggestion service (/api/v1). The fetch function is
// injectable so tests can run against a stubbed service.

export type CandidateClass = number | "no-suggestion";

export interface Suggestion {
  class: CandidateClass;
  theme: string;
  percent: number;
}

export type Slot = Suggestion | null;

export interface UtteranceResponse {
  suggestions: Suggestion[];
  slots: Slot[];
}

export interface SlotsResponse {
  slots: Slot[];
  counter: number;
}

export interface CopyResponse {
  answer_text: string;
  counter: number;
}

export interface FaqItem {
  id: number;
  theme: string;
  question: string;
  answer: string;
}

export interface Project {
  id: number;
  title: string;
  keywords: string[];
  description: string;
}

export type Role = "customer" | "agent";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const payload = await response.json();
        if (payload && payload.detail) detail = String(payload.detail);
      } catch {
        // keep the status code
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/sessions");
    return body.session_id;
  }

  postUtterance(sessionId: string, sender: string, text: string, role: Role) {
    return this.request<UtteranceResponse>(
      "POST",
      `/sessions/${sessionId}/utterances`,
      { sender, text, role },
    );
  }

  discard(sessionId: string, slot: number) {
    return this.request<SlotsResponse>("POST", `/sessions/${sessionId}/slots/${slot}/discard`);
  }

  copyToChat(sessionId: string, slot: number) {
    return this.request<CopyResponse>("POST", `/sessions/${sessionId}/slots/${slot}/copy`);
  }

  getMoreInfo(sessionId: string, slot: number) {
    return this.request<FaqItem>("GET", `/sessions/${sessionId}/slots/${slot}/info`);
  }

  submitFeedback(sessionId: string, searchTerms: string, faqId: number) {
    return this.request<{ ok: boolean }>("POST", `/sessions/${sessionId}/feedback`, {
      search_terms: searchTerms,
      faq_id: faqId,
    });
  }

  projects(sessionId: string) {
    return this.request<Project[]>("GET", `/sessions/${sessionId}/projects`);
  }

  updateSettings(sessionId: string, aiSupport: boolean, learningBehavior: boolean) {
    return this.request<{ ok: boolean }>("PUT", `/sessions/${sessionId}/settings`, {
      ai_support: aiSupport,
      learning_behavior: learningBehavior,
    });
  }
}
