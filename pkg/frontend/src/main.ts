// DOM wiring for the agent console. The page has three columns: the chat
// window with the agent input field, the suggestion sidebar (two cards,
// counter, feedback search), and the project panel. A customer simulator
// pane stands in for the separate chat platform the customer would use.

import { ApiClient, FaqItem } from "./api.js";
import { ConsoleStore } from "./store.js";
import { cardViews, counterLabel, projectsVisible } from "./view.js";

const API_BASE =
  new URLSearchParams(window.location.search).get("api") ??
  "http://127.0.0.1:8000/api/v1";

const store = new ConsoleStore(new ApiClient(API_BASE), window.sessionStorage);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const messagesEl = el<HTMLDivElement>("messages");
const inputEl = el<HTMLTextAreaElement>("agent-input");
const sendBtn = el<HTMLButtonElement>("send-btn");
const counterEl = el<HTMLSpanElement>("counter");
const cardsEl = el<HTMLDivElement>("cards");
const introEl = el<HTMLDivElement>("intro");
const introDismissBtn = el<HTMLButtonElement>("intro-dismiss");
const aiToggle = el<HTMLInputElement>("toggle-ai");
const learningToggle = el<HTMLInputElement>("toggle-learning");
const feedbackInput = el<HTMLInputElement>("feedback-query");
const feedbackResultsEl = el<HTMLDivElement>("feedback-results");
const feedbackSubmitBtn = el<HTMLButtonElement>("feedback-submit");
const feedbackNoteEl = el<HTMLSpanElement>("feedback-note");
const projectsPanel = el<HTMLDivElement>("projects-panel");
const projectsEl = el<HTMLDivElement>("projects");
const customerInput = el<HTMLTextAreaElement>("customer-input");
const customerSendBtn = el<HTMLButtonElement>("customer-send");
const errorEl = el<HTMLDivElement>("error-bar");

function render(): void {
  const state = store.state;

  introEl.hidden = !state.introVisible;

  messagesEl.innerHTML = "";
  for (const message of state.messages) {
    const bubble = document.createElement("div");
    bubble.className = `msg ${message.role}`;
    const sender = document.createElement("span");
    sender.className = "sender";
    sender.textContent = message.sender;
    const body = document.createElement("span");
    body.textContent = message.text;
    bubble.append(sender, body);
    messagesEl.appendChild(bubble);
  }
  messagesEl.scrollTop = messagesEl.scrollHeight;

  if (inputEl.value !== state.inputText) inputEl.value = state.inputText;
  counterEl.textContent = counterLabel(state);

  cardsEl.innerHTML = "";
  for (const card of cardViews(state)) {
    const node = document.createElement("div");
    node.className = card.empty ? "card empty" : "card";
    if (card.empty) {
      node.innerHTML = `<p class="placeholder">Keine weitere Empfehlung</p>`;
    } else {
      const header = document.createElement("div");
      header.className = "card-header";
      header.innerHTML = `<strong>${card.theme}</strong><span class="percent">${card.percent}%</span>`;
      node.appendChild(header);
      if (card.expanded) {
        const detail = document.createElement("div");
        detail.className = "card-detail";
        const question = document.createElement("p");
        question.className = "q";
        question.textContent = card.expanded.question;
        const answer = document.createElement("p");
        answer.textContent = card.expanded.answer;
        detail.append(question, answer);
        node.appendChild(detail);
      }
      const actions = document.createElement("div");
      actions.className = "card-actions";
      const copyBtn = document.createElement("button");
      copyBtn.textContent = "In Chat übernehmen";
      copyBtn.onclick = () => void store.copyToChat(card.slot);
      const infoBtn = document.createElement("button");
      infoBtn.textContent = card.expanded ? "Weniger" : "Mehr Infos";
      infoBtn.onclick = () => void store.toggleMoreInfo(card.slot);
      const discardBtn = document.createElement("button");
      discardBtn.className = "discard";
      discardBtn.textContent = "Verwerfen";
      discardBtn.onclick = () => void store.discard(card.slot);
      actions.append(copyBtn, infoBtn, discardBtn);
      node.appendChild(actions);
    }
    cardsEl.appendChild(node);
  }

  aiToggle.checked = state.aiSupport;
  learningToggle.checked = state.learningBehavior;

  const results = store.feedbackResults();
  feedbackResultsEl.innerHTML = "";
  for (const faq of results) {
    const row = document.createElement("div");
    row.className =
      state.feedbackSelected === faq.id ? "feedback-row selected" : "feedback-row";
    row.textContent = `${faq.theme}: ${faq.question}`;
    row.onclick = () => store.selectFeedback(faq.id);
    feedbackResultsEl.appendChild(row);
  }
  feedbackSubmitBtn.disabled =
    state.feedbackSelected === null || !state.feedbackQuery.trim();
  feedbackNoteEl.textContent = state.feedbackConfirmed ? "Danke für das Feedback!" : "";

  projectsPanel.hidden = !projectsVisible(state);
  projectsEl.innerHTML = "";
  for (const project of state.projects) {
    const node = document.createElement("div");
    node.className = "project";
    node.innerHTML = `<strong>${project.title}</strong><p>${project.description}</p>`;
    projectsEl.appendChild(node);
  }

  errorEl.hidden = !state.error;
  errorEl.textContent = state.error ?? "";
}

async function loadFaqs(): Promise<FaqItem[]> {
  try {
    const response = await fetch("faqs.json");
    if (!response.ok) return [];
    return (await response.json()) as FaqItem[];
  } catch {
    console.warn("faqs.json not found; feedback search will be empty");
    return [];
  }
}

async function start(): Promise<void> {
  store.onChange(render);

  introDismissBtn.onclick = () => store.dismissIntro();
  inputEl.oninput = () => (store.state.inputText = inputEl.value);
  sendBtn.onclick = () => void store.sendAgentMessage();
  aiToggle.onchange = () =>
    void store.updateSettings(aiToggle.checked, learningToggle.checked);
  learningToggle.onchange = () =>
    void store.updateSettings(aiToggle.checked, learningToggle.checked);
  feedbackInput.oninput = () => store.setFeedbackQuery(feedbackInput.value);
  feedbackSubmitBtn.onclick = () => void store.submitFeedback();
  customerSendBtn.onclick = () => {
    const text = customerInput.value.trim();
    if (!text) return;
    customerInput.value = "";
    void store.postUtterance("KundeEins", text, "customer");
  };

  await store.init(await loadFaqs());
  render();
}

void start();
