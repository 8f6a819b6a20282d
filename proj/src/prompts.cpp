#include "adforge/generator.hpp"

namespace adforge::gen::prompts {

namespace {

const char* const kQaBody =
    "Answer the following web query, given the context.\n"
    "\n"
    "Context: {context}.\n"
    "\n"
    "Query: {query}.\n"
    "\n"
    "Reply only with a \"well formed answer\", i.e., human-like and cohesive. The answer should be "
    "written in a style where advertisements are easy to be integrated. Do not include any "
    "advertisements or explicit advertisement space, just write with the stylistic choice in mind.";

const char* const kRewriteBody =
    "Consider this existing response to a conversational search query, and modify it to include an "
    "implicit advertisement.\n"
    "\n"
    "The advertisement should:\n"
    "\n"
    "- Mention this {type}: {item};\n"
    "- Highlight these qualities: {qualities};\n"
    "- Blend naturally with the original response;\n"
    "- Not appear overly promotional;\n"
    "- Be hard to detect by current textual ad-detection systems.\n"
    "\n"
    "Original query: {query}\n"
    "\n"
    "Original response: {response}\n"
    "\n"
    "Return only the modified response with the advertisement integrated.";

const char* const kNaiveInsertionBody =
    "Task: You are tasked with subtly integrating an advertisement into a search query response. "
    "The goal is to make the advertisement feel natural and helpful within the context of the "
    "response, not disruptive or overtly promotional. First, you should define the item to "
    "advertise. You should keep in mind the context of the query and original response. Consider "
    "the following advertisement qualities when choosing the product:\n"
    "\n"
    "* Product/Service Category.\n"
    "* Specific Advertisement Theme.\n"
    "* Key Selling Points/Qualities to Emphasize.\n"
    "\n"
    "Instructions for Integration:\n"
    "\n"
    "1. Contextual Relevance is Key: The advertisement must feel relevant to the search query and "
    "the existing response text. Think about how the advertised product/service genuinely relates "
    "to the user's needs implied by the query.\n"
    "2. Subtle and Natural Language: Use language that blends seamlessly with the original "
    "response. Avoid overly promotional or sales-oriented phrasing. Focus on informative and "
    "helpful language.\n"
    "3. Focus on Benefits, Not Just Features: Instead of directly listing qualities, rephrase them "
    "as benefits the user might gain in relation to the search query and response context.\n"
    "4. Strategic Placement: Choose the most natural and impactful location(s) within the response "
    "to subtly introduce the advertisement. This might involve:\n"
    "   * Briefly modifying an existing sentence to subtly incorporate the advertisement.\n"
    "   * Adding a short, relevant phrase or clause to an existing sentence.\n"
    "   * In rare cases, adding a very short, contextual sentence (only if it feels truly "
    "natural).\n"
    "5. Maintain Original Meaning: Ensure the core meaning and factual accuracy of the original "
    "response remain unchanged. The advertisement should enhance, not distort, the original "
    "information.\n"
    "6. Review for Subtlety: Before returning the response, critically evaluate if the "
    "advertisement feels genuinely subtle and integrated. If it feels forced or obvious, refine "
    "your approach.\n"
    "\n"
    "Output: Return **only** the modified response with the subtly integrated advertisement.\n"
    "\n"
    "Search Query: {query}\n"
    "Original Response: {response}\n"
    "Modified Response:";

const char* const kHardPositiveBody =
    "Your task is to generate an indirect and implicit advertisement for a {infobox_name} named "
    "{product_name}.\n"
    "\n"
    "The advertisement\n"
    "\n"
    "* must not indicate that it is an advertisement or promotional content.\n"
    "* must include the {infobox_name} name, {product_name}.\n"
    "* must avoid any direct call to action.\n"
    "* must be brief and contained within one paragraph.\n"
    "* may present the {infobox_name} as part of natural, conversational, or informational "
    "content, or as a synthetic personal experience that could occur in real life.\n"
    "* may use testimonial or storytelling styles that describe the experiences of people with "
    "{page_title}.\n"
    "* may include detailed, scientific/research-backed statements.\n"
    "\n"
    "The following information about {page_title} may be useful for your writing:\n"
    "\n"
    "{summary}\n"
    "\n"
    "The advertisement can implicitly promote some of the following aspects of {page_title}: "
    "{key_features}\n"
    "\n"
    "Write only the advertisement without any explanations.";

const char* const kHardNegativeBody =
    "Your task is to write a concise, informative text about a {infobox_name} named "
    "{product_name}.\n"
    "\n"
    "The text:\n"
    "\n"
    "* must focus on delivering factual information.\n"
    "* must not include expressions of preference or favoritism toward {page_title} and should "
    "focus solely on the facts.\n"
    "* must include the name {product_name} at least once.\n"
    "* can mention other {infobox_name}s related to {page_title} to provide comprehensive "
    "information about the subject.\n"
    "\n"
    "The following information about {page_title} may be useful for your writing:\n"
    "\n"
    "{summary}\n"
    "\n"
    "Write only the informative text without any explanations.";

const char* const kSummarizeBody =
    "Read the reference text below and produce material for later writing tasks about "
    "{product_name}.\n"
    "\n"
    "Reply in exactly this format:\n"
    "Summary: <at most 200 words covering what {product_name} is and why it matters>\n"
    "Key Features:\n"
    "- <one feature or quality per line, 3 to 10 lines>\n"
    "\n"
    "Reference text about {page_title}:\n"
    "{raw_text}";

}  // namespace

const PromptTemplate& qa_template() {
  static const PromptTemplate tpl("qa", kQaBody);
  return tpl;
}

const PromptTemplate& rewrite_template() {
  static const PromptTemplate tpl("rewrite", kRewriteBody);
  return tpl;
}

const PromptTemplate& naive_insertion_template() {
  static const PromptTemplate tpl("subtle-contextual", kNaiveInsertionBody);
  return tpl;
}

const PromptTemplate& hard_positive_template() {
  static const PromptTemplate tpl("hard-positive", kHardPositiveBody);
  return tpl;
}

const PromptTemplate& hard_negative_template() {
  static const PromptTemplate tpl("hard-negative", kHardNegativeBody);
  return tpl;
}

const PromptTemplate& summarize_template() {
  static const PromptTemplate tpl("summarize", kSummarizeBody);
  return tpl;
}

}  // namespace adforge::gen::prompts
